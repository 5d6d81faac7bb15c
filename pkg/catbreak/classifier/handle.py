"""Query-accounted access to a target classifier."""

from __future__ import annotations

import logging
import threading
from typing import Sequence

import numpy as np

from catbreak.categorical.instance import Instance
from catbreak.classifier.base import (
    CategoricalModel,
    ConfidenceVector,
    Objective,
    grad_indicators,
)
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


class ClassifierHandle:
    """Wraps a model and counts confidence queries and gradient passes.

    ``query_count`` grows by exactly one per evaluated instance and is never
    decremented; gradient passes are tracked separately in ``grad_count``.
    """

    def __init__(self, model: CategoricalModel, white_box: bool = True):
        self.model = model
        self.white_box = white_box
        self._query_count = 0
        self._grad_count = 0
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._query_count

    @property
    def grad_count(self) -> int:
        return self._grad_count

    @property
    def values_per_feature(self) -> tuple[int, ...]:
        return self.model.values_per_feature

    @property
    def num_classes(self) -> int:
        return self.model.num_classes

    def fork(self, white_box: bool | None = None) -> "ClassifierHandle":
        """A handle on the same model with fresh counters."""
        return ClassifierHandle(self.model, self.white_box if white_box is None else white_box)

    def predict(self, inst: Instance) -> ConfidenceVector:
        return self.predict_many([inst])[0]

    def predict_many(self, instances: Sequence[Instance]) -> np.ndarray:
        probs = self.model.confidences(list(instances))
        with self._lock:
            self._query_count += len(instances)
        return probs

    def grad(self, inst: Instance, objective: Objective | None = None) -> np.ndarray:
        if not self.white_box:
            raise CatbreakError("BLACK_BOX_MODEL", "no gradients on a black-box handle")
        grad = grad_indicators(self.model, inst, objective)
        with self._lock:
            self._grad_count += 1
        return grad
