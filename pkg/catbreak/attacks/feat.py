"""Gradient-ranked, variance-aware UCB search over features (and its random-ranking variant)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from catbreak.attacks.common import (
    AttackConfig,
    AttackResult,
    AttackRun,
    StopReason,
    TraceRecord,
    best_value_pull,
    check_success,
    omp_rank,
)
from catbreak.bandit.reward import variant_reward
from catbreak.bandit.ucb import ArmStats, select_arm, update
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.base import margin_of
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

Ranker = Callable[[Instance], list[int]]
# called after every UCB round with (round index, current instance, its confidences)
RoundHook = Callable[[int, Instance, np.ndarray], None]


def run_feat(
    run: AttackRun,
    ranker: Ranker,
    stop_on_success: bool = True,
    on_round: RoundHook | None = None,
) -> AttackResult:
    handle, inst, cfg = run.handle, run.inst, run.cfg
    precheck = check_success(handle, inst)
    if precheck.success:
        return run.finish(inst, precheck.margin, StopReason.PRECHECK)
    conf_orig = precheck.probs
    x_hat, probs_hat = inst, conf_orig
    modified: set[int] = set()
    if cfg.budget == 0:
        return run.finish(inst, precheck.margin, StopReason.BUDGET)

    reason = None
    max_outer = math.ceil(cfg.budget / cfg.window)
    while run.outer_iterations < max_outer:
        if run.out_of_time():
            reason = StopReason.TIME
            break
        arms = ranker(x_hat)
        if not arms:
            reason = StopReason.EXHAUSTED
            break
        run.outer_iterations += 1
        iteration = run.outer_iterations
        window_start = x_hat

        # one pull per arm; nothing is applied yet
        pulls = []
        stats = []
        for feature in arms:
            before = run.queries
            pull = best_value_pull(
                handle, x_hat, feature, conf_orig, cfg.lam, cfg.reward_variant, cfg.allow_delete
            )
            pulls.append(pull)
            stats.append(update(ArmStats.tracked(), pull.reward))
            run.trace.append(
                TraceRecord(iteration, 0, feature, pull.value, pull.reward, None,
                            run.queries - before)
            )

        for rnd in range(1, cfg.window + 1):
            if run.out_of_time():
                reason = StopReason.TIME
                break
            chosen, scores = select_arm(stats, cfg.alpha, cfg.squared_alpha_bonus)
            feature, value = arms[chosen], pulls[chosen].value
            if feature not in modified and len(modified) >= cfg.budget:
                reason = StopReason.BUDGET
                break

            before = run.queries
            if x_hat.categories[feature] != value:
                x_hat = x_hat.with_values({feature: value})
                if x_hat == window_start.with_values({feature: value}):
                    # same instance the arm's pull already scored
                    probs_hat = pulls[chosen].probs
                else:
                    probs_hat = handle.predict(x_hat)
            modified.add(feature)
            g = variant_reward(probs_hat, conf_orig, inst.label, cfg.lam, cfg.reward_variant)
            update(stats[chosen], g)
            margin = margin_of(probs_hat, inst.label)
            run.trace.append(
                TraceRecord(iteration, rnd, feature, value, g, margin, run.queries - before,
                            tuple(float(s) for s in scores))
            )
            if on_round is not None:
                on_round(rnd, x_hat, probs_hat)
            if stop_on_success and margin >= 0.0:
                return run.finish(x_hat, margin, StopReason.SUCCESS)
        if reason is not None:
            break

    return run.finish(x_hat, margin_of(probs_hat, inst.label), reason or StopReason.BUDGET)


def gradient_ranker(handle: ClassifierHandle, cfg: AttackConfig) -> Ranker:
    def rank(x_hat: Instance) -> list[int]:
        return omp_rank(
            handle, x_hat, cfg.objective, cfg.top_l, cfg.score_rule, cfg.allow_delete
        )

    return rank


def random_ranker(handle: ClassifierHandle, cfg: AttackConfig) -> Ranker:
    rng = np.random.default_rng(cfg.seed)
    counts = handle.values_per_feature

    def rank(x_hat: Instance) -> list[int]:
        eligible = [
            i for i in range(len(counts))
            if admissible_values(x_hat, i, counts, cfg.allow_delete)
        ]
        size = min(cfg.top_l, len(eligible))
        return [eligible[int(i)] for i in rng.choice(len(eligible), size=size, replace=False)]

    return rank


def feat_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """Re-rank features by gradient every ``tau`` rounds and pick edits by UCB score.

    Each window pulls every top-ranked feature once (its best value on the
    current instance), then spends up to ``tau`` rounds applying the arm with
    the highest score and observing the realized reward. Stops at the first
    misclassification, when a new feature would exceed the budget, or when
    time runs out.
    """
    cfg = cfg or AttackConfig()
    if not handle.white_box:
        raise CatbreakError("BLACK_BOX_MODEL", "feat needs a white-box handle")
    run = AttackRun("feat", handle, inst, cfg)
    return run_feat(run, gradient_ranker(handle, cfg))


def feat_b_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """``feat_attack`` with ``top_l`` features drawn uniformly at random per window."""
    cfg = cfg or AttackConfig()
    run = AttackRun("feat-b", handle, inst, cfg)
    return run_feat(run, random_ranker(handle, cfg))
