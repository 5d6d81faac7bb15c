"""Synthetic datasets labelled by the target model."""

from __future__ import annotations

import logging

import numpy as np

from catbreak.categorical.instance import Instance
from catbreak.classifier.base import CategoricalModel
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

SAMPLE_BATCH = 256
# give up on balancing after this many draws per requested instance
MAX_DRAWS_PER_INSTANCE = 1000


def _sample(
    rng: np.random.Generator, counts: tuple[int, ...], size: int, absent_rate: float
) -> list[tuple[int | None, ...]]:
    codes = np.stack([rng.integers(0, m, size=size) for m in counts], axis=1)
    absent = rng.random((size, len(counts))) < absent_rate
    return [
        tuple(None if gone else int(code) for code, gone in zip(row, mask))
        for row, mask in zip(codes, absent)
    ]


def gen_dataset(
    model: CategoricalModel,
    n_instances: int,
    balance: bool = False,
    seed: int = 0,
    absent_rate: float = 0.0,
) -> list[Instance]:
    """Uniform per-feature samples labelled with the model's argmax class.

    With ``balance`` the draws are rejection-sampled so class counts differ by
    at most one (lower class indices take the remainder).
    """
    if n_instances < 0:
        raise CatbreakError("INVALID_ARG", "n_instances must be >= 0")
    if not 0.0 <= absent_rate < 1.0:
        raise CatbreakError("INVALID_ARG", "absent_rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    counts = model.values_per_feature
    k = model.num_classes
    quotas = [n_instances // k + (1 if c < n_instances % k else 0) for c in range(k)]

    out: list[Instance] = []
    draws = 0
    while len(out) < n_instances:
        if draws > MAX_DRAWS_PER_INSTANCE * max(n_instances, 1):
            raise CatbreakError(
                "INVALID_ARG",
                f"could not balance classes after {draws} draws",
                {"quotas_left": quotas},
            )
        batch = _sample(rng, counts, SAMPLE_BATCH, absent_rate)
        draws += SAMPLE_BATCH
        probs = model.confidences([Instance(cats) for cats in batch])
        for cats, label in zip(batch, np.argmax(probs, axis=1)):
            label = int(label)
            if balance:
                if quotas[label] == 0:
                    continue
                quotas[label] -= 1
            out.append(Instance(cats, label))
            if len(out) == n_instances:
                break
    logger.debug("Generated %d instances (balance=%s, seed=%d)", len(out), balance, seed)
    return out
