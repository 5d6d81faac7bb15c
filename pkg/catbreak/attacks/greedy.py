"""Greedy subset search: full-feature (FSGS) and gradient-restricted (OMPGS)."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from catbreak.attacks.common import (
    AttackConfig,
    AttackResult,
    AttackRun,
    StopReason,
    TraceRecord,
    check_success,
    feature_scores,
    rank_features,
)
from catbreak.bandit.reward import batch_rewards
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.base import margin_of
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

# (candidate feature, values to try) pairs for one greedy iteration
Candidates = list[tuple[int, Sequence[int | None]]]
Proposer = Callable[[Instance, dict[int, int | None]], Candidates]


def subsets(chosen: dict[int, int | None]) -> list[dict[int, int | None]]:
    """All ``2^|chosen|`` sub-assignments, in bitmask order over insertion order."""
    items = list(chosen.items())
    return [
        {f: v for bit, (f, v) in enumerate(items) if mask >> bit & 1}
        for mask in range(1 << len(items))
    ]


def _greedy(run: AttackRun, propose: Proposer) -> AttackResult:
    handle, inst, cfg = run.handle, run.inst, run.cfg
    precheck = check_success(handle, inst)
    if precheck.success:
        return run.finish(inst, precheck.margin, StopReason.PRECHECK)
    conf_orig = precheck.probs
    x_hat, margin = inst, precheck.margin
    # recorded best value per selected feature, in selection order
    chosen: dict[int, int | None] = {}

    reason = StopReason.BUDGET
    while len(chosen) < cfg.budget:
        if run.out_of_time():
            reason = StopReason.TIME
            break
        if 1 << len(chosen) > cfg.fsgs_subset_cap:
            raise CatbreakError(
                "CAP_EXCEEDED",
                f"{1 << len(chosen)} subsets exceed the cap of {cfg.fsgs_subset_cap}",
                {"selected": len(chosen)},
            )
        candidates = propose(x_hat, chosen)
        if not candidates:
            reason = StopReason.EXHAUSTED
            break
        run.outer_iterations += 1
        before = run.queries

        best_reward, best = -np.inf, None
        for base in subsets(chosen):
            start = inst.with_values(base)
            for feature, values in candidates:
                batch = [start.with_values({feature: v}) for v in values]
                probs = handle.predict_many(batch)
                rewards = batch_rewards(probs, conf_orig, inst.label, cfg.lam, cfg.reward_variant)
                top = int(np.argmax(rewards))
                if rewards[top] > best_reward:
                    best_reward = float(rewards[top])
                    best = (feature, values[top], batch[top], probs[top])

        feature, value, x_hat, probs = best
        chosen[feature] = value
        margin = margin_of(probs, inst.label)
        logger.debug(
            "%s iteration %d picked feature %d -> %s (margin %.4f)",
            run.method, run.outer_iterations, feature, value, margin,
        )
        run.trace.append(
            TraceRecord(run.outer_iterations, 0, feature, value, best_reward, margin,
                        run.queries - before)
        )
        if margin >= 0.0:
            return run.finish(x_hat, margin, StopReason.SUCCESS)

    return run.finish(x_hat, margin, reason)


def fsgs_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """Greedy search over every unselected feature, value and subset of the selected set.

    Iteration ``t`` evaluates every value of each of the ``N - t`` remaining
    features on top of each of the ``2^t`` subsets of the recorded edits, so
    it costs ``(N - t) * M * 2^t`` queries on a uniform-``M`` instance.
    """
    cfg = cfg or AttackConfig()
    counts = handle.values_per_feature

    def propose(x_hat: Instance, chosen: dict[int, int | None]) -> Candidates:
        candidates = []
        for feature, count in enumerate(counts):
            if feature in chosen:
                continue
            values: tuple[int | None, ...] = tuple(range(count))
            if cfg.allow_delete and inst.categories[feature] is not None:
                values += (None,)
            candidates.append((feature, values))
        return candidates

    run = AttackRun("fsgs", handle, inst, cfg)
    return _greedy(run, propose)


def gradient_best_value(
    grad: np.ndarray, inst: Instance, feature: int, counts: Sequence[int], allow_delete: bool
) -> int | None:
    """Admissible value with the largest first-order objective gain, ties to the lowest."""
    values = admissible_values(inst, feature, counts, allow_delete)
    current = inst.categories[feature]
    base = 0.0 if current is None else grad[feature, current]
    gains = [(-base if v is None else grad[feature, v] - base) for v in values]
    return values[int(np.argmax(gains))]


def ompgs_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """FSGS restricted to the gradient's top-``L`` features, one gradient-chosen value each."""
    cfg = cfg or AttackConfig()
    if not handle.white_box:
        raise CatbreakError("BLACK_BOX_MODEL", "ompgs needs a white-box handle")
    counts = handle.values_per_feature

    def propose(x_hat: Instance, chosen: dict[int, int | None]) -> Candidates:
        grad = handle.grad(x_hat, cfg.objective)
        scores = feature_scores(grad, x_hat, counts, cfg.score_rule, cfg.allow_delete)
        ranked = rank_features(scores, cfg.top_l, exclude=list(chosen))
        # values are chosen against the original instance the subsets are built on
        return [
            (f, (gradient_best_value(grad, inst, f, counts, cfg.allow_delete),))
            for f in ranked
            if admissible_values(inst, f, counts, cfg.allow_delete)
        ]

    run = AttackRun("ompgs", handle, inst, cfg)
    return _greedy(run, propose)
