"""Categorical instances and their indicator / embedding-tensor views."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from catbreak.errors import CatbreakError

ABSENT = None


def _check_values_per_feature(values_per_feature: Sequence[int]) -> tuple[int, ...]:
    counts = tuple(int(m) for m in values_per_feature)
    if not counts:
        raise CatbreakError("SHAPE_MISMATCH", "at least one feature is required")
    if any(m < 1 for m in counts):
        raise CatbreakError("SHAPE_MISMATCH", "every feature needs at least one value")
    return counts


def slot_mask(values_per_feature: Sequence[int]) -> np.ndarray:
    """Boolean ``[N][max M_i]`` mask of the slots that exist."""
    counts = np.asarray(values_per_feature, dtype=np.int64)
    return np.arange(int(counts.max()))[None, :] < counts[:, None]


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Per-feature, per-value embedding vectors.

    ``vectors`` is padded to ``[N][max M_i][D]``; padding slots hold zeros.
    """

    values_per_feature: tuple[int, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        counts = _check_values_per_feature(self.values_per_feature)
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 3:
            raise CatbreakError("SHAPE_MISMATCH", "vectors must be indexed [feature][value][dim]")
        if vectors.shape[0] != len(counts) or vectors.shape[1] != max(counts):
            raise CatbreakError(
                "SHAPE_MISMATCH",
                f"vectors shape {vectors.shape[:2]} does not match "
                f"({len(counts)}, {max(counts)})",
            )
        if vectors.shape[2] < 1:
            raise CatbreakError("SHAPE_MISMATCH", "embedding dim must be positive")
        if not np.all(np.isfinite(vectors)):
            raise CatbreakError("NON_FINITE", "embedding vectors must be finite")
        vectors[~slot_mask(counts)] = 0.0
        vectors.setflags(write=False)
        object.__setattr__(self, "values_per_feature", counts)
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Sequence[float]]]) -> "EmbeddingTable":
        """Build from ragged rows: ``rows[i][j]`` is the vector of value j of feature i."""
        counts = tuple(len(row) for row in rows)
        _check_values_per_feature(counts)
        dims = {len(vec) for row in rows for vec in row}
        if len(dims) != 1:
            raise CatbreakError("SHAPE_MISMATCH", "all embedding vectors must share one dim")
        dim = dims.pop()
        padded = np.zeros((len(rows), max(counts), dim))
        for i, row in enumerate(rows):
            padded[i, : len(row)] = np.asarray(row, dtype=np.float64)
        return cls(counts, padded)

    @property
    def num_features(self) -> int:
        return len(self.values_per_feature)

    @property
    def max_values(self) -> int:
        return self.vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.vectors.shape[2]

    @property
    def mask(self) -> np.ndarray:
        return slot_mask(self.values_per_feature)


@dataclass(frozen=True)
class Instance:
    """An N-feature categorical sample; ``None`` entries are ABSENT."""

    categories: tuple[int | None, ...]
    label: int = 0

    def __post_init__(self) -> None:
        categories = tuple(None if c is None else int(c) for c in self.categories)
        if any(c is not None and c < 0 for c in categories):
            raise CatbreakError("SHAPE_MISMATCH", "category values must be non-negative")
        if int(self.label) < 0:
            raise CatbreakError("SHAPE_MISMATCH", "label must be non-negative")
        object.__setattr__(self, "categories", categories)
        object.__setattr__(self, "label", int(self.label))

    @property
    def num_features(self) -> int:
        return len(self.categories)

    def is_absent(self, feature: int) -> bool:
        return self.categories[feature] is None

    def codes(self) -> np.ndarray:
        """Category codes as an int array, -1 marking ABSENT."""
        return np.array([-1 if c is None else c for c in self.categories], dtype=np.int64)

    def check_compatible(self, values_per_feature: Sequence[int]) -> None:
        if len(values_per_feature) != self.num_features:
            raise CatbreakError(
                "SHAPE_MISMATCH",
                f"instance has {self.num_features} features, expected {len(values_per_feature)}",
            )
        for i, (value, count) in enumerate(zip(self.categories, values_per_feature)):
            if value is not None and value >= count:
                raise CatbreakError(
                    "SHAPE_MISMATCH", f"feature {i} value {value} outside [0, {count})"
                )

    def indicators(self, values_per_feature: Sequence[int]) -> np.ndarray:
        """One-hot indicator view ``b`` of shape ``[N][max M_i]``."""
        self.check_compatible(values_per_feature)
        b = np.zeros((self.num_features, max(values_per_feature)))
        for i, value in enumerate(self.categories):
            if value is not None:
                b[i, value] = 1.0
        return b

    def with_values(self, changes: dict[int, int | None]) -> "Instance":
        categories = list(self.categories)
        for feature, value in changes.items():
            categories[feature] = value
        return Instance(tuple(categories), self.label)

    def to_dict(self) -> dict:
        return {"categories": list(self.categories), "label": self.label}


@dataclass(frozen=True, eq=False)
class RelaxedIndicators:
    """Indicators relaxed to ``[0, 1]``; nonexistent slots are exactly 0."""

    values: np.ndarray
    values_per_feature: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise CatbreakError("SHAPE_MISMATCH", "relaxed indicators must be [N][M]")
        counts = self.values_per_feature or (values.shape[1],) * values.shape[0]
        counts = _check_values_per_feature(counts)
        if values.shape != (len(counts), max(counts)):
            raise CatbreakError("SHAPE_MISMATCH", "relaxed indicators do not match feature counts")
        if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
            raise CatbreakError("INVALID_ARG", "relaxed indicators must lie within [0, 1]")
        if np.any(values[~slot_mask(counts)] != 0.0):
            raise CatbreakError("INVALID_ARG", "nonexistent slots must be exactly 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "values_per_feature", counts)

    @classmethod
    def from_instance(
        cls, inst: Instance, values_per_feature: Sequence[int]
    ) -> "RelaxedIndicators":
        return cls(inst.indicators(values_per_feature), tuple(values_per_feature))


def stack_tensor(
    inst: Instance | RelaxedIndicators, table: EmbeddingTable
) -> np.ndarray:
    """Embedding-stacked tensor ``x[i, j, :] = b[i, j] * e[i, j]`` of shape ``[N][M][D]``.

    Accepts a relaxed indicator array too; the map is linear in the indicators.
    """
    if isinstance(inst, RelaxedIndicators):
        if inst.values_per_feature != table.values_per_feature:
            raise CatbreakError("SHAPE_MISMATCH", "relaxed indicators do not match the table")
        b = inst.values
    else:
        b = inst.indicators(table.values_per_feature)
    return b[:, :, None] * table.vectors
