"""Classifier contract shared by every target model."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from catbreak.categorical.instance import Instance, slot_mask
from catbreak.errors import CatbreakError

# alias: a length-K float64 array on the probability simplex
ConfidenceVector = np.ndarray

SIMPLEX_TOLERANCE = 1e-9


class ObjectiveKind(str, Enum):
    MARGIN = "margin"
    CLASS = "class"


@dataclass(frozen=True)
class Objective:
    """Scalar attack objective over a confidence vector.

    MARGIN is ``max_{k != label} f_k - f_label``; CLASS(k) is ``f_k``.
    """

    kind: ObjectiveKind = ObjectiveKind.MARGIN
    cls: int | None = None

    @classmethod
    def margin(cls) -> "Objective":
        return cls(ObjectiveKind.MARGIN)

    @classmethod
    def of_class(cls, k: int) -> "Objective":
        return cls(ObjectiveKind.CLASS, int(k))

    @classmethod
    def parse(cls, text: str) -> "Objective":
        text = text.strip().lower()
        if text == "margin":
            return cls.margin()
        if text.startswith("class:"):
            try:
                return cls.of_class(int(text.split(":", 1)[1]))
            except ValueError as err:
                raise CatbreakError("INVALID_ARG", f"bad objective {text!r}") from err
        raise CatbreakError("INVALID_ARG", f"unknown objective {text!r}")

    def weights(self, probs: np.ndarray, label: int) -> np.ndarray:
        """Linear weights ``w`` with objective ``= w . probs`` on the active branch."""
        w = np.zeros(probs.shape[-1])
        if self.kind is ObjectiveKind.CLASS:
            if self.cls is None or not 0 <= self.cls < w.size:
                raise CatbreakError("INVALID_ARG", f"class {self.cls} outside [0, {w.size})")
            w[self.cls] = 1.0
            return w
        w[best_wrong_class(probs, label)] = 1.0
        w[label] -= 1.0
        return w

    def value(self, probs: np.ndarray, label: int) -> float:
        return float(self.weights(probs, label) @ probs)

    def __str__(self) -> str:
        return "margin" if self.kind is ObjectiveKind.MARGIN else f"class:{self.cls}"


def best_wrong_class(probs: np.ndarray, label: int) -> int:
    """Highest-confidence class other than ``label``; ties go to the lowest index."""
    masked = np.array(probs, dtype=np.float64)
    masked[label] = -np.inf
    return int(np.argmax(masked))


def margin_of(probs: np.ndarray, label: int) -> float:
    """``m_f``: best wrong-class confidence minus the true-class confidence."""
    return float(probs[best_wrong_class(probs, label)] - probs[label])


def check_confidences(probs: np.ndarray, num_classes: int | None = None) -> ConfidenceVector:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or (num_classes is not None and probs.size != num_classes):
        raise CatbreakError("SHAPE_MISMATCH", f"confidence vector has shape {probs.shape}")
    if not np.all(np.isfinite(probs)):
        raise CatbreakError("NON_FINITE", "confidences are not finite")
    if probs.min() < -SIMPLEX_TOLERANCE or abs(probs.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise CatbreakError("INVALID_ARG", "confidences are not on the probability simplex")
    return probs


def codes_to_indicators(codes: np.ndarray, max_values: int) -> np.ndarray:
    """One-hot ``[B][N][M]`` indicators from ``[B][N]`` codes (-1 is ABSENT)."""
    codes = np.atleast_2d(codes)
    b = np.zeros(codes.shape + (max_values,))
    rows, cols = np.nonzero(codes >= 0)
    b[rows, cols, codes[rows, cols]] = 1.0
    return b


class CategoricalModel(ABC):
    """A differentiable decision function over relaxed categorical indicators."""

    values_per_feature: tuple[int, ...]
    kind: str = "model"

    @property
    @abstractmethod
    def num_classes(self) -> int:
        ...

    @property
    def num_features(self) -> int:
        return len(self.values_per_feature)

    @property
    def max_values(self) -> int:
        return max(self.values_per_feature)

    @property
    def mask(self) -> np.ndarray:
        return slot_mask(self.values_per_feature)

    @abstractmethod
    def forward(self, indicators: np.ndarray) -> np.ndarray:
        """Confidences ``[B][K]`` for a batch of (possibly relaxed) indicators ``[B][N][M]``."""

    @abstractmethod
    def objective_grad(
        self, indicators: np.ndarray, label: int, objective: Objective
    ) -> np.ndarray:
        """Gradient ``[N][M]`` of the objective w.r.t. the indicators at one point."""

    def check_instance(self, inst: Instance) -> None:
        inst.check_compatible(self.values_per_feature)
        if not 0 <= inst.label < self.num_classes:
            raise CatbreakError(
                "SHAPE_MISMATCH", f"label {inst.label} outside [0, {self.num_classes})"
            )

    def confidences(self, instances: Sequence[Instance]) -> np.ndarray:
        for inst in instances:
            self.check_instance(inst)
        if not instances:
            return np.zeros((0, self.num_classes))
        codes = np.stack([inst.codes() for inst in instances])
        probs = self.forward(codes_to_indicators(codes, self.max_values))
        if not np.all(np.isfinite(probs)):
            raise CatbreakError("NON_FINITE", "model produced non-finite confidences")
        return probs


def grad_indicators(
    model: CategoricalModel, inst: Instance, objective: Objective | None = None
) -> np.ndarray:
    """Objective gradient w.r.t. the instance's relaxed indicators, ``[N][M]``."""
    model.check_instance(inst)
    objective = objective or Objective.margin()
    grad = model.objective_grad(inst.indicators(model.values_per_feature), inst.label, objective)
    return np.where(model.mask, grad, 0.0)
