"""Does the indicator gradient rank features the way real single edits do?"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import spearmanr

from catbreak.attacks.common import ScoreRule, feature_scores
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.base import Objective
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FidelityReport:
    correlation: float
    degenerate: bool
    per_instance: tuple[float, ...]
    instances: int
    rule: ScoreRule

    def to_dict(self) -> dict:
        return {
            "correlation": None if math.isnan(self.correlation) else self.correlation,
            "degenerate": self.degenerate,
            "per_instance": [None if math.isnan(c) else c for c in self.per_instance],
            "instances": self.instances,
            "rule": self.rule.value,
        }


def true_changes(
    handle: ClassifierHandle,
    inst: Instance,
    objective: Objective,
    allow_delete: bool = False,
) -> np.ndarray:
    """Largest ``|objective(edited) - objective(inst)|`` per feature; NaN without alternatives."""
    counts = handle.values_per_feature
    base = objective.value(handle.predict(inst), inst.label)
    options = [admissible_values(inst, f, counts, allow_delete) for f in range(len(counts))]
    batch = [inst.with_values({f: v}) for f, values in enumerate(options) for v in values]
    probs = handle.predict_many(batch)
    changes = np.full(len(counts), np.nan)
    offset = 0
    for feature, values in enumerate(options):
        if values:
            deltas = [
                abs(objective.value(p, inst.label) - base)
                for p in probs[offset: offset + len(values)]
            ]
            changes[feature] = max(deltas)
        offset += len(values)
    return changes


def instance_fidelity(
    handle: ClassifierHandle,
    inst: Instance,
    objective: Objective | None = None,
    rule: ScoreRule = ScoreRule.EDIT_DELTA,
    allow_delete: bool = False,
) -> float:
    """Spearman correlation for one instance; NaN when either ranking is constant.

    The default rule scores each slot relative to the value already present,
    the same reference ``true_changes`` measures against.
    """
    objective = objective or Objective.margin()
    grad = handle.grad(inst, objective)
    scores = feature_scores(grad, inst, handle.values_per_feature, rule, allow_delete)
    changes = true_changes(handle, inst, objective, allow_delete)
    keep = np.isfinite(scores) & np.isfinite(changes)
    scores, changes = scores[keep], changes[keep]
    if scores.size < 2 or np.ptp(scores) == 0.0 or np.ptp(changes) == 0.0:
        return math.nan
    rho, _ = spearmanr(scores, changes)
    return float(rho)


def gradient_indicator_fidelity(
    handle: ClassifierHandle,
    dataset: Sequence[Instance],
    sample: int = 100,
    objective: Objective | None = None,
    rule: ScoreRule = ScoreRule.EDIT_DELTA,
    seed: int = 0,
    allow_delete: bool = False,
) -> FidelityReport:
    """Mean per-instance rank correlation over ``sample`` instances drawn without replacement."""
    if not handle.white_box:
        raise CatbreakError("BLACK_BOX_MODEL", "fidelity needs gradients")
    if not dataset:
        raise CatbreakError("EMPTY_DATASET", "fidelity needs at least one instance")
    if sample < 1:
        raise CatbreakError("INVALID_ARG", "sample must be >= 1")
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(len(dataset), size=min(sample, len(dataset)), replace=False))
    per_instance = tuple(
        instance_fidelity(handle, dataset[i], objective, rule, allow_delete) for i in picks
    )
    valid = [c for c in per_instance if not math.isnan(c)]
    correlation = float(np.mean(valid)) if valid else math.nan
    logger.debug("Fidelity %.4f over %d/%d instances", correlation, len(valid), len(picks))
    return FidelityReport(correlation, not valid, per_instance, len(picks), rule)
