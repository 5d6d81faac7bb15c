"""Greedy first-order attack: flip the single slot the gradient favors most."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

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


def best_gain_slot(
    grad: np.ndarray,
    inst: Instance,
    features: Sequence[int],
    counts: Sequence[int],
    allow_delete: bool = False,
) -> tuple[int, int | None, float] | None:
    """``(feature, value, gain)`` with the largest positive first-order gain, else None.

    The gain is signed, ``grad[f, value] - grad[f, current]``: a slot whose
    edit would lower the objective is never picked, however large ``|grad|`` is.
    """
    best = None
    for feature in features:
        current = inst.categories[feature]
        base = 0.0 if current is None else grad[feature, current]
        for value in admissible_values(inst, feature, counts, allow_delete):
            gain = -base if value is None else grad[feature, value] - base
            if gain > 0.0 and (best is None or gain > best[2]):
                best = (feature, value, float(gain))
    return best


def _combo_step(
    run: AttackRun,
    x_hat: Instance,
    features: Sequence[int],
    depth: int,
    conf_orig: np.ndarray,
) -> tuple[dict[int, int | None], float, np.ndarray] | None:
    handle, cfg = run.handle, run.cfg
    counts = handle.values_per_feature
    options = {f: admissible_values(x_hat, f, counts, cfg.allow_delete) for f in features}
    combos = [
        combo for k in range(1, depth + 1) for combo in itertools.combinations(features, k)
    ]
    total = sum(math.prod(len(options[f]) for f in combo) for combo in combos)
    if total > cfg.exhaustive_limit:
        raise CatbreakError("TOO_LARGE", f"{total} combinations exceed {cfg.exhaustive_limit}")

    best_reward, best = -np.inf, None
    for combo in combos:
        assignments = [
            dict(zip(combo, values))
            for values in itertools.product(*(options[f] for f in combo))
        ]
        probs = handle.predict_many([x_hat.with_values(a) for a in assignments])
        rewards = batch_rewards(probs, conf_orig, x_hat.label, cfg.lam, cfg.reward_variant)
        top = int(np.argmax(rewards))
        if rewards[top] > best_reward:
            best_reward = float(rewards[top])
            best = (assignments[top], best_reward, probs[top])
    return best


def grad_attack(
    handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    """One gradient pass and one query per iteration; never revisits an edited feature.

    With ``cfg.combo_depth > 0`` each iteration instead evaluates every value
    combination over up to ``combo_depth`` of the top-ranked features.
    """
    cfg = cfg or AttackConfig()
    if not handle.white_box:
        raise CatbreakError("BLACK_BOX_MODEL", "gradattack needs a white-box handle")
    run = AttackRun("gradattack", handle, inst, cfg)
    counts = handle.values_per_feature

    precheck = check_success(handle, inst)
    if precheck.success:
        return run.finish(inst, precheck.margin, StopReason.PRECHECK)
    conf_orig = precheck.probs
    x_hat, margin = inst, precheck.margin
    modified: set[int] = set()

    reason = StopReason.BUDGET
    while len(modified) < cfg.budget:
        if run.out_of_time():
            reason = StopReason.TIME
            break
        grad = handle.grad(x_hat, cfg.objective)
        scores = feature_scores(grad, x_hat, counts, cfg.score_rule, cfg.allow_delete)
        ranked = rank_features(scores, cfg.top_l, exclude=sorted(modified))
        before = run.queries

        if cfg.combo_depth > 0:
            depth = min(cfg.combo_depth, cfg.budget - len(modified))
            step = _combo_step(run, x_hat, ranked, depth, conf_orig) if ranked else None
            if step is None:
                reason = StopReason.EXHAUSTED
                break
            edits, g, probs = step
        else:
            # ranked by score_rule; the slot within them by signed gain
            slot = best_gain_slot(grad, x_hat, ranked, counts, cfg.allow_delete)
            if slot is None:
                reason = StopReason.EXHAUSTED
                break
            edits = {slot[0]: slot[1]}
            probs = handle.predict(x_hat.with_values(edits))
            g = float(batch_rewards(probs, conf_orig, inst.label, cfg.lam, cfg.reward_variant)[0])

        run.outer_iterations += 1
        x_hat = x_hat.with_values(edits)
        modified.update(edits)
        margin = margin_of(probs, inst.label)
        for feature, value in edits.items():
            run.trace.append(
                TraceRecord(run.outer_iterations, 0, feature, value, g, margin,
                            run.queries - before)
            )
        if margin >= 0.0:
            return run.finish(x_hat, margin, StopReason.SUCCESS)

    return run.finish(x_hat, margin, reason)
