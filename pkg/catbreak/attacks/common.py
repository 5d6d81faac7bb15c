"""Shared attack contract: configuration, results, success checks and ranking."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from typing import Sequence

import numpy as np

from catbreak.bandit.reward import RewardVariant, batch_rewards
from catbreak.bandit.ucb import BanditConfig
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import (
    Perturbation,
    admissible_values,
    perturbation_between,
)
from catbreak.classifier.base import Objective, margin_of
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


class ScoreRule(str, Enum):
    MAX_ABS = "max-abs"
    ROW_NORM = "row-norm"
    EDIT_DELTA = "edit-delta"


class StopReason(str, Enum):
    SUCCESS = "success"
    PRECHECK = "precheck"
    BUDGET = "budget"
    TIME = "time"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class AttackConfig:
    budget: int = 3
    time_limit: float = 60.0
    top_l: int = 10
    # None means max(1, budget // 3)
    tau: int | None = None
    alpha: float = 4.0
    lam: float = 1.0
    reward_variant: RewardVariant = RewardVariant.PERTURBED_BASE
    squared_alpha_bonus: bool = False
    seed: int = 0
    objective: Objective = field(default_factory=Objective.margin)
    score_rule: ScoreRule = ScoreRule.MAX_ABS
    allow_delete: bool = False
    fsgs_subset_cap: int = 4096
    combo_depth: int = 0
    exhaustive_limit: int = 1_000_000

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise CatbreakError("INVALID_ARG", "budget must be >= 0")
        if self.top_l < 1:
            raise CatbreakError("INVALID_ARG", "top_l must be >= 1")
        if self.tau is not None and self.tau < 1:
            raise CatbreakError("INVALID_ARG", "tau must be >= 1")
        if not self.time_limit > 0.0:
            raise CatbreakError("INVALID_ARG", "time_limit must be positive")
        if self.alpha < 0.0:
            raise CatbreakError("INVALID_ARG", "alpha must be >= 0")
        if self.combo_depth < 0 or self.fsgs_subset_cap < 1 or self.exhaustive_limit < 1:
            raise CatbreakError("INVALID_ARG", "caps must be positive and combo_depth >= 0")

    @property
    def window(self) -> int:
        return self.tau if self.tau is not None else max(1, self.budget // 3)

    @property
    def bandit(self) -> BanditConfig:
        return BanditConfig(self.alpha, self.lam, self.reward_variant, self.squared_alpha_bonus)

    def with_overrides(self, **overrides) -> "AttackConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise CatbreakError("INVALID_ARG", f"unknown config keys {sorted(unknown)}")
        if isinstance(overrides.get("reward_variant"), str):
            overrides["reward_variant"] = RewardVariant(overrides["reward_variant"])
        if isinstance(overrides.get("score_rule"), str):
            overrides["score_rule"] = ScoreRule(overrides["score_rule"])
        if isinstance(overrides.get("objective"), str):
            overrides["objective"] = Objective.parse(overrides["objective"])
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["tau"] = self.window
        data["reward_variant"] = self.reward_variant.value
        data["score_rule"] = self.score_rule.value
        data["objective"] = str(self.objective)
        return data


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    round: int
    feature: int | None
    value: int | None
    reward: float | None
    margin: float | None
    queries: int
    scores: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["scores"] = None if self.scores is None else list(self.scores)
        return data


@dataclass(frozen=True)
class AttackResult:
    method: str
    success: bool
    perturbation: Perturbation
    adversarial: Instance
    changed: int
    queries: int
    grad_passes: int
    wall_time: float
    outer_iterations: int
    margin: float
    stop_reason: StopReason
    trace: tuple[TraceRecord, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "success": self.success,
            "perturbation": self.perturbation.to_list(),
            "adversarial": self.adversarial.to_dict(),
            "changed": self.changed,
            "queries": self.queries,
            "grad_passes": self.grad_passes,
            "wall_time": self.wall_time,
            "outer_iterations": self.outer_iterations,
            "margin": self.margin,
            "stop_reason": self.stop_reason.value,
            "trace": [record.to_dict() for record in self.trace],
        }


@dataclass(frozen=True)
class SuccessCheck:
    success: bool
    margin: float
    probs: np.ndarray


def check_success(handle: ClassifierHandle, inst: Instance) -> SuccessCheck:
    """One query: ``margin >= 0`` means the instance is misclassified."""
    probs = handle.predict(inst)
    margin = margin_of(probs, inst.label)
    return SuccessCheck(margin >= 0.0, margin, probs)


class AttackRun:
    """Bookkeeping shared by one attack run: counters, clock and trace."""

    def __init__(self, method: str, handle: ClassifierHandle, inst: Instance, cfg: AttackConfig):
        handle.model.check_instance(inst)
        self.method = method
        self.handle = handle
        self.inst = inst
        self.cfg = cfg
        self.trace: list[TraceRecord] = []
        self.outer_iterations = 0
        self._queries0 = handle.query_count
        self._grads0 = handle.grad_count
        self._start = time.perf_counter()
        logger.debug("Starting %s attack, budget=%d", method, cfg.budget)

    @property
    def queries(self) -> int:
        return self.handle.query_count - self._queries0

    def out_of_time(self) -> bool:
        return time.perf_counter() - self._start >= self.cfg.time_limit

    def finish(self, adversarial: Instance, margin: float, reason: StopReason) -> AttackResult:
        perturbation = perturbation_between(self.inst, adversarial)
        success = margin >= 0.0 and len(perturbation) <= self.cfg.budget
        result = AttackResult(
            method=self.method,
            success=success,
            perturbation=perturbation,
            adversarial=adversarial,
            changed=len(perturbation),
            queries=self.queries,
            grad_passes=self.handle.grad_count - self._grads0,
            wall_time=time.perf_counter() - self._start,
            outer_iterations=self.outer_iterations,
            margin=float(margin),
            stop_reason=reason,
            trace=tuple(self.trace),
        )
        logger.debug(
            "Finished %s attack: success=%s changed=%d queries=%d stop=%s",
            self.method, result.success, result.changed, result.queries, reason.value,
        )
        return result


def feature_scores(
    grad: np.ndarray,
    inst: Instance,
    values_per_feature: Sequence[int],
    rule: ScoreRule = ScoreRule.MAX_ABS,
    allow_delete: bool = False,
) -> np.ndarray:
    """Per-feature score from a gradient ``[N][M]``; ``-inf`` marks features with no alternative."""
    scores = np.full(len(values_per_feature), -np.inf)
    for i, count in enumerate(values_per_feature):
        values = admissible_values(inst, i, values_per_feature, allow_delete)
        if not values:
            continue
        current = inst.categories[i]
        if rule is ScoreRule.ROW_NORM:
            scores[i] = float(np.linalg.norm(grad[i, :count]))
            continue
        slots = [j for j in values if j is not None]
        if rule is ScoreRule.MAX_ABS:
            mags = [abs(grad[i, j]) for j in slots]
            if None in values:
                mags.append(abs(grad[i, current]))
        else:
            base = 0.0 if current is None else grad[i, current]
            mags = [abs(grad[i, j] - base) for j in slots]
            if None in values:
                mags.append(abs(base))
        scores[i] = max(mags)
    return scores


def rank_features(scores: np.ndarray, top_l: int, exclude: Sequence[int] = ()) -> list[int]:
    """Top ``top_l`` features by score, ties to the lowest index."""
    scores = np.array(scores, dtype=np.float64)
    scores[list(exclude)] = -np.inf
    order = np.argsort(-scores, kind="stable")
    return [int(i) for i in order[:top_l] if np.isfinite(scores[i])]


def omp_rank(
    handle: ClassifierHandle,
    inst: Instance,
    objective: Objective | None = None,
    top_l: int = 10,
    rule: ScoreRule = ScoreRule.MAX_ABS,
    allow_delete: bool = False,
    exclude: Sequence[int] = (),
) -> list[int]:
    """One gradient pass, zero queries; the ``top_l`` features by gradient score."""
    if not handle.white_box:
        raise CatbreakError("BLACK_BOX_MODEL", "gradient ranking needs a white-box handle")
    grad = handle.grad(inst, objective)
    scores = feature_scores(grad, inst, handle.values_per_feature, rule, allow_delete)
    return rank_features(scores, top_l, exclude)


@dataclass(frozen=True)
class Pull:
    feature: int
    value: int | None
    reward: float
    queries: int
    probs: np.ndarray


def best_value_pull(
    handle: ClassifierHandle,
    inst: Instance,
    feature: int,
    conf_orig: np.ndarray,
    lam: float = 1.0,
    variant: RewardVariant = RewardVariant.PERTURBED_BASE,
    allow_delete: bool = False,
) -> Pull:
    """Evaluate every admissible value of ``feature`` on ``inst`` and keep the best reward."""
    values = admissible_values(inst, feature, handle.values_per_feature, allow_delete)
    if not values:
        raise CatbreakError("NO_ALTERNATIVES", f"feature {feature} has no alternative value")
    probs = handle.predict_many([inst.with_values({feature: v}) for v in values])
    rewards = batch_rewards(probs, conf_orig, inst.label, lam, variant)
    best = int(np.argmax(rewards))
    return Pull(feature, values[best], float(rewards[best]), len(values), probs[best])
