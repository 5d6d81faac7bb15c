"""Variance-aware UCB scores and single-pass arm statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from catbreak.bandit.reward import RewardVariant
from catbreak.errors import CatbreakError


@dataclass(frozen=True)
class BanditConfig:
    alpha: float = 4.0
    lam: float = 1.0
    variant: RewardVariant = RewardVariant.PERTURBED_BASE
    # use alpha^2 * ln t / t_l as the last term instead of ln t / t_l
    squared_alpha_bonus: bool = False

    def __post_init__(self) -> None:
        if not self.alpha >= 0.0:
            raise CatbreakError("INVALID_ARG", f"alpha must be >= 0, got {self.alpha}")
        if not math.isfinite(self.lam):
            raise CatbreakError("INVALID_ARG", "lambda must be finite")


@dataclass
class ArmStats:
    """Running pull count, mean and sum of squared deviations for one arm."""

    pulls: int = 0
    mean: float = 0.0
    m2: float = 0.0
    history: list[float] | None = field(default=None, repr=False)

    @classmethod
    def tracked(cls) -> "ArmStats":
        return cls(history=[])

    @property
    def unpulled(self) -> bool:
        return self.pulls == 0

    @property
    def variance(self) -> float:
        """Population variance ``m2 / pulls``."""
        if self.unpulled:
            raise CatbreakError("UNPULLED_ARM", "variance of an arm that was never pulled")
        return max(self.m2, 0.0) / self.pulls

    def to_dict(self) -> dict:
        return {
            "pulls": self.pulls,
            "mean": None if self.unpulled else self.mean,
            "variance": None if self.unpulled else self.variance,
        }


def update(stats: ArmStats, g: float) -> ArmStats:
    """Welford update of ``stats`` with reward ``g``; returns ``stats``."""
    g = float(g)
    if not math.isfinite(g):
        raise CatbreakError("NON_FINITE", f"reward {g} is not finite")
    stats.pulls += 1
    delta = g - stats.mean
    stats.mean += delta / stats.pulls
    stats.m2 += delta * (g - stats.mean)
    if stats.history is not None:
        stats.history.append(g)
    return stats


def ucb_score(
    stats: ArmStats, t: int, alpha: float = 4.0, squared_alpha_bonus: bool = False
) -> float:
    """``mean + sqrt(alpha * var * ln t / t_l) + ln t / t_l``."""
    if stats.unpulled:
        raise CatbreakError("UNPULLED_ARM", "UCB score of an arm that was never pulled")
    if t < stats.pulls:
        raise CatbreakError("INVALID_ARG", f"t={t} is below the arm's {stats.pulls} pulls")
    log_t = math.log(t)
    explore = math.sqrt(alpha * stats.variance * log_t / stats.pulls)
    bonus = (alpha**2 if squared_alpha_bonus else 1.0) * log_t / stats.pulls
    return stats.mean + explore + bonus


def ucb_scores(
    means: np.ndarray,
    variances: np.ndarray,
    pulls: np.ndarray,
    t,
    alpha: float = 4.0,
    squared_alpha_bonus: bool = False,
) -> np.ndarray:
    """Vectorized ``ucb_score``; ``t`` broadcasts against the leading axes."""
    pulls = np.asarray(pulls, dtype=np.float64)
    if np.any(pulls < 1):
        raise CatbreakError("UNPULLED_ARM", "every arm must be pulled before scoring")
    log_t = np.log(np.asarray(t, dtype=np.float64))
    if log_t.ndim:
        log_t = log_t[..., None]
    explore = np.sqrt(alpha * np.asarray(variances) * log_t / pulls)
    bonus = (alpha**2 if squared_alpha_bonus else 1.0) * log_t / pulls
    return np.asarray(means) + explore + bonus


def select_arm(
    arms: list[ArmStats], alpha: float, squared_alpha_bonus: bool = False
) -> tuple[int, list[float]]:
    """Arm with the highest score at ``t = total pulls``, plus every arm's score.

    Ties go to the lowest index.
    """
    t = sum(stats.pulls for stats in arms)
    scores = [ucb_score(stats, t, alpha, squared_alpha_bonus) for stats in arms]
    return int(np.argmax(scores)), scores
