"""Brute-force oracle over every perturbation within the budget."""

from __future__ import annotations

import itertools

import numpy as np

from catbreak.attacks.common import (
    AttackConfig,
    AttackResult,
    AttackRun,
    StopReason,
    TraceRecord,
)
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError


def enumeration_size(options: list[tuple], budget: int) -> int:
    """Number of instances with at most ``budget`` edited features (the original included)."""
    # coefficients of prod_f (1 + |options_f| x), truncated at x^budget
    coeffs = [1] + [0] * budget
    for values in options:
        for k in range(budget, 0, -1):
            coeffs[k] += coeffs[k - 1] * len(values)
    return sum(coeffs)


def _margins(probs: np.ndarray, label: int) -> np.ndarray:
    wrong = probs.copy()
    wrong[:, label] = -np.inf
    return wrong.max(axis=1) - probs[:, label]


def exhaustive_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """Smallest successful perturbation, best margin among those; failure if none exists.

    Cardinalities are tried in increasing order, ``k = 0`` being the
    unperturbed instance. Raises TOO_LARGE before evaluating anything when the
    enumeration exceeds ``cfg.exhaustive_limit``.
    """
    cfg = cfg or AttackConfig()
    run = AttackRun("exhaustive", handle, inst, cfg)
    counts = handle.values_per_feature
    options = [admissible_values(inst, f, counts, cfg.allow_delete) for f in range(len(counts))]
    size = enumeration_size(options, cfg.budget)
    if size > cfg.exhaustive_limit:
        raise CatbreakError(
            "TOO_LARGE", f"{size} evaluations exceed the limit of {cfg.exhaustive_limit}"
        )

    best_seen = (-np.inf, inst)
    for k in range(min(cfg.budget, len(counts)) + 1):
        if k > 0 and run.out_of_time():
            return run.finish(best_seen[1], best_seen[0], StopReason.TIME)
        run.outer_iterations += 1
        before = run.queries
        winner = None
        for combo in itertools.combinations(range(len(counts)), k):
            candidates = [
                inst.with_values(dict(zip(combo, values)))
                for values in itertools.product(*(options[f] for f in combo))
            ]
            if not candidates:
                continue
            margins = _margins(handle.predict_many(candidates), inst.label)
            top = int(np.argmax(margins))
            if margins[top] > best_seen[0]:
                best_seen = (float(margins[top]), candidates[top])
            if margins[top] >= 0.0 and (winner is None or margins[top] > winner[0]):
                winner = (float(margins[top]), candidates[top])
        run.trace.append(
            TraceRecord(k, 0, None, None, None, best_seen[0], run.queries - before)
        )
        if winner is not None:
            reason = StopReason.PRECHECK if k == 0 else StopReason.SUCCESS
            return run.finish(winner[1], winner[0], reason)

    # failure: report the closest instance found without claiming success
    return run.finish(best_seen[1], best_seen[0], StopReason.EXHAUSTED)
