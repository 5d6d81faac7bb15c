"""A classifier whose confidences are affine in the indicators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from catbreak.categorical.instance import slot_mask
from catbreak.classifier.base import CategoricalModel, Objective
from catbreak.errors import CatbreakError


@dataclass(frozen=True, eq=False)
class AffineModel(CategoricalModel):
    """``f(b) = base + sum_{i,j} b[i, j] * weights[i, j, :]``.

    Each slot's weight row sums to zero and the per-class worst case
    ``base_k - sum_i max_j |weights[i, j, k]|`` is non-negative, so every
    admissible assignment lands on the probability simplex.
    """

    base: np.ndarray
    weights: np.ndarray
    values_per_feature: tuple[int, ...]
    seed: int | None = None
    kind = "affine"

    def __post_init__(self) -> None:
        base = np.array(self.base, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        counts = tuple(int(m) for m in self.values_per_feature)
        if base.ndim != 1 or base.size < 2:
            raise CatbreakError("SHAPE_MISMATCH", "base must be a vector of at least 2 classes")
        if weights.shape != (len(counts), max(counts), base.size):
            raise CatbreakError("SHAPE_MISMATCH", f"weights shape {weights.shape} is inconsistent")
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(weights))):
            raise CatbreakError("NON_FINITE", "affine parameters must be finite")
        weights[~slot_mask(counts)] = 0.0
        if abs(base.sum() - 1.0) > 1e-9 or np.any(np.abs(weights.sum(axis=2)) > 1e-9):
            raise CatbreakError("INVALID_ARG", "base must sum to 1 and slot rows to 0")
        worst = base - np.abs(weights).max(axis=1).sum(axis=0)
        if worst.min() < 0.0:
            raise CatbreakError("INVALID_ARG", "weights can push a confidence below zero")
        base.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values_per_feature", counts)

    @property
    def num_classes(self) -> int:
        return self.base.size

    def forward(self, indicators: np.ndarray) -> np.ndarray:
        indicators = np.asarray(indicators, dtype=np.float64)
        return self.base + np.einsum("bnm,nmk->bk", indicators, self.weights)

    def objective_grad(
        self, indicators: np.ndarray, label: int, objective: Objective
    ) -> np.ndarray:
        probs = self.forward(np.asarray(indicators, dtype=np.float64)[None])[0]
        return self.weights @ objective.weights(probs, label)


def make_affine_classifier(
    n: int, m: int, k: int = 2, seed: int = 0, fill: float = 0.9
) -> AffineModel:
    """Random affine classifier using ``fill`` of the simplex head-room."""
    if n < 1 or m < 1 or k < 2 or not 0.0 < fill <= 1.0:
        raise CatbreakError("INVALID_ARG", "need n >= 1, m >= 1, k >= 2 and fill in (0, 1]")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, m, k))
    raw -= raw.mean(axis=2, keepdims=True)
    base = np.full(k, 1.0 / k)
    worst = np.abs(raw).max(axis=1).sum(axis=0).max()
    weights = raw * (fill * base[0] / worst)
    return AffineModel(base, weights, (m,) * n, seed=seed)
