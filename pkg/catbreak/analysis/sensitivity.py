"""Per-feature sensitivity: how far one edit can move the decision confidence."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.base import best_wrong_class
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


class SensitivityRule(str, Enum):
    # worst case over every admissible value
    MAX_VALUE = "max-value"
    # the first admissible value only
    FIRST_ALT = "first-alt"


class SensitivityTarget(str, Enum):
    # rise of the best wrong class
    BEST_WRONG = "best-wrong"
    # drop of the true class
    TRUE_DROP = "true-drop"


@dataclass(frozen=True)
class SensitivityReport:
    values: tuple[float, ...]
    rule: SensitivityRule
    target: SensitivityTarget
    instances: int

    def ranking(self) -> list[int]:
        """Features by decreasing sensitivity, ties to the lowest index."""
        return [int(i) for i in np.argsort(-np.asarray(self.values), kind="stable")]

    def to_dict(self) -> dict:
        return {
            "values": list(self.values),
            "rule": self.rule.value,
            "target": self.target.value,
            "instances": self.instances,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["feature", "fs"])
            for feature, value in enumerate(self.values):
                writer.writerow([feature, f"{value:.10g}"])


def _instance_changes(
    handle: ClassifierHandle,
    inst: Instance,
    rule: SensitivityRule,
    target: SensitivityTarget,
    allow_delete: bool,
) -> np.ndarray:
    counts = handle.values_per_feature
    probs = handle.predict(inst)
    cls = inst.label if target is SensitivityTarget.TRUE_DROP else best_wrong_class(
        probs, inst.label
    )
    options = []
    for feature in range(len(counts)):
        values = admissible_values(inst, feature, counts, allow_delete)
        if rule is SensitivityRule.FIRST_ALT:
            values = values[:1]
        options.append(values)
    batch = [inst.with_values({f: v}) for f, values in enumerate(options) for v in values]
    alt = handle.predict_many(batch)[:, cls] if batch else np.zeros(0)

    changes = np.zeros(len(counts))
    offset = 0
    for feature, values in enumerate(options):
        if values:
            delta = alt[offset: offset + len(values)] - probs[cls]
            if target is SensitivityTarget.TRUE_DROP:
                delta = -delta
            changes[feature] = delta.max()
        offset += len(values)
    return changes


def feature_sensitivity(
    handle: ClassifierHandle,
    dataset: Sequence[Instance],
    rule: SensitivityRule = SensitivityRule.MAX_VALUE,
    target: SensitivityTarget = SensitivityTarget.BEST_WRONG,
    allow_delete: bool = False,
) -> SensitivityReport:
    """Mean over instances of each feature's single-edit confidence change.

    The default target is the per-instance best wrong class; features with no
    admissible alternative contribute zero.
    """
    if not dataset:
        raise CatbreakError("EMPTY_DATASET", "sensitivity needs at least one instance")
    total = np.zeros(len(handle.values_per_feature))
    for inst in dataset:
        total += _instance_changes(handle, inst, rule, target, allow_delete)
    values = total / len(dataset)
    logger.debug("Sensitivity over %d instances, max FS %.4f", len(dataset), values.max())
    return SensitivityReport(tuple(float(v) for v in values), rule, target, len(dataset))
