"""Synthetic targets with planted feature sensitivity."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from catbreak.categorical.instance import EmbeddingTable
from catbreak.classifier.mlp import EmbedMlpModel
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

# planted features get this many times the embedding scale of the rest
SKEW_FACTOR = 10.0
UNIFORM_SCALE_BAND = (0.9, 1.1)


@dataclass(frozen=True)
class Sensitivity:
    """SKEWED(top) or UNIFORM sensitivity profile."""

    kind: str = "skewed"
    top: int = 1

    @classmethod
    def skewed(cls, top: int) -> "Sensitivity":
        return cls("skewed", int(top))

    @classmethod
    def uniform(cls) -> "Sensitivity":
        return cls("uniform", 0)

    @classmethod
    def parse(cls, text: str) -> "Sensitivity":
        text = text.strip().lower()
        if text == "uniform":
            return cls.uniform()
        if text.startswith("skewed"):
            _, _, top = text.partition(":")
            try:
                return cls.skewed(int(top) if top else 1)
            except ValueError as err:
                raise CatbreakError("INVALID_ARG", f"bad sensitivity {text!r}") from err
        raise CatbreakError("INVALID_ARG", f"unknown sensitivity {text!r}")

    def __str__(self) -> str:
        return f"skewed:{self.top}" if self.kind == "skewed" else "uniform"


def _layers(
    rng: np.random.Generator,
    first_layer: np.ndarray | None,
    in_dim: int,
    input_power: float,
    hidden: Sequence[int],
    k: int,
    logit_scale: float,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Hidden layers scaled to unit pre-activations, output scaled to ``logit_scale``."""
    layers = []
    fan_in = in_dim
    for index, width in enumerate(hidden):
        if index == 0 and first_layer is not None:
            weight = first_layer
        elif index == 0:
            weight = rng.standard_normal((width, fan_in)) / np.sqrt(input_power)
        else:
            weight = rng.standard_normal((width, fan_in)) * np.sqrt(2.0 / fan_in)
        layers.append((weight, np.zeros(width)))
        fan_in = width
    if hidden:
        out = rng.standard_normal((k, fan_in)) * logit_scale * np.sqrt(2.0 / fan_in)
    else:
        out = rng.standard_normal((k, fan_in)) * logit_scale / np.sqrt(input_power)
    layers.append((out, np.zeros(k)))
    return layers


def make_planted_classifier(
    n: int,
    m: int,
    k: int = 2,
    d: int = 8,
    sensitivity: Sensitivity | None = None,
    seed: int = 0,
    hidden: Sequence[int] = (32,),
    logit_scale: float = 2.0,
) -> EmbedMlpModel:
    """Random embedding MLP whose per-feature sensitivity follows ``sensitivity``.

    SKEWED(top): ``top`` randomly chosen features get embeddings ``SKEW_FACTOR``
    times larger than the others. UNIFORM: every feature shares one value
    table and one first-layer block, rescaled by a factor from a narrow band.
    """
    sensitivity = sensitivity or Sensitivity.skewed(1)
    if n < 1 or m < 2 or k < 2 or d < 1:
        raise CatbreakError("INVALID_ARG", "need n >= 1, m >= 2, k >= 2 and d >= 1")
    if sensitivity.kind == "skewed" and not 0 <= sensitivity.top <= n:
        raise CatbreakError("INVALID_ARG", f"top={sensitivity.top} must lie in [0, {n}]")
    rng = np.random.default_rng(seed)

    if sensitivity.kind == "skewed":
        planted = tuple(sorted(int(i) for i in rng.choice(n, size=sensitivity.top, replace=False)))
        scales = np.full(n, 1.0 / SKEW_FACTOR)
        scales[list(planted)] = 1.0
        vectors = rng.standard_normal((n, m, d)) * scales[:, None, None]
        input_power = float(np.sum(scales**2) * d)
        first_layer = None
    elif sensitivity.kind == "uniform":
        planted = ()
        shared = rng.standard_normal((m, d))
        scales = rng.uniform(*UNIFORM_SCALE_BAND, size=n)
        vectors = np.stack([scales[i] * shared[rng.permutation(m)] for i in range(n)])
        input_power = float(n * d)
        first_layer = None
        if hidden:
            block = rng.standard_normal((hidden[0], d)) / np.sqrt(input_power)
            first_layer = np.tile(block, (1, n))
    else:
        raise CatbreakError("INVALID_ARG", f"unknown sensitivity kind {sensitivity.kind!r}")

    table = EmbeddingTable((m,) * n, vectors)
    layers = _layers(rng, first_layer, n * d, input_power, hidden, k, logit_scale)
    logger.debug(
        "Planted classifier n=%d m=%d k=%d d=%d sensitivity=%s planted=%s",
        n, m, k, d, sensitivity, planted,
    )
    return EmbedMlpModel(
        table, tuple(layers), seed=seed, planted=planted, sensitivity=str(sensitivity)
    )


def make_random_classifier(
    n: int,
    m: int,
    k: int = 2,
    d: int = 8,
    seed: int = 0,
    hidden: Sequence[int] = (32,),
    table: EmbeddingTable | None = None,
) -> EmbedMlpModel:
    """Random embedding MLP with no planted structure.

    A given ``table`` (for example one read from an embedding file) replaces the
    random one, and its shape overrides ``n``, ``m`` and ``d``.
    """
    rng = np.random.default_rng(seed)
    if table is None:
        table = EmbeddingTable((m,) * n, rng.standard_normal((n, m, d)))
    in_dim = table.num_features * table.dim
    layers = _layers(rng, None, in_dim, float(in_dim), hidden, k, 2.0)
    return EmbedMlpModel(table, tuple(layers), seed=seed, sensitivity="random")


def make_constant_classifier(
    n: int, m: int, probs: Sequence[float], d: int = 2, seed: int = 0
) -> EmbedMlpModel:
    """Embedding MLP with zero weights past the embedding: always outputs ``probs``."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 2 or np.any(probs <= 0.0):
        raise CatbreakError("INVALID_ARG", "probs must be a positive vector of >= 2 classes")
    rng = np.random.default_rng(seed)
    table = EmbeddingTable((m,) * n, rng.standard_normal((n, m, d)))
    output = (np.zeros((probs.size, n * d)), np.log(probs / probs.sum()))
    return EmbedMlpModel(table, (output,), seed=seed, sensitivity="constant")
