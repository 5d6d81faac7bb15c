"""Expected-regret bound for the variance-aware UCB policy and a stationary simulator."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from catbreak.bandit.ucb import ucb_scores
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

# reward rows drawn per seed at a time
TAPE_CHUNK = 1024


class ArmDistribution(str, Enum):
    # symmetric two-point law on {mean - sd, mean + sd}
    BERNOULLI = "bernoulli"
    # normal clamped to [0, 2 * lam]
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ArmSpec:
    mean: float
    variance: float = 0.0
    distribution: ArmDistribution = ArmDistribution.BERNOULLI
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise CatbreakError("INVALID_ARG", f"arm variance {self.variance} is negative")
        sd = math.sqrt(self.variance)
        low, high = (self.mean - sd, self.mean + sd)
        if self.distribution is ArmDistribution.GAUSSIAN:
            low = high = self.mean
        if low < 0.0 or high > 2.0 * self.lam:
            raise CatbreakError(
                "INVALID_ARG", f"arm ({self.mean}, {self.variance}) leaves [0, {2 * self.lam}]"
            )

    @classmethod
    def parse_list(
        cls, text: str, distribution: ArmDistribution = ArmDistribution.BERNOULLI
    ) -> list["ArmSpec"]:
        """Parse ``"mu:var,mu:var,..."``."""
        arms = []
        for chunk in text.split(","):
            mean, _, variance = chunk.strip().partition(":")
            try:
                arms.append(cls(float(mean), float(variance or 0.0), distribution))
            except ValueError as err:
                if isinstance(err, CatbreakError):
                    raise
                raise CatbreakError("INVALID_ARG", f"bad arm spec {chunk!r}") from err
        return arms


def gaps(arms: Sequence[ArmSpec]) -> np.ndarray:
    means = np.array([arm.mean for arm in arms])
    return means.max() - means


def regret_bound(arms: Iterable[tuple[float, float]], t_total: int, alpha: float) -> float:
    """Sum over ``(gap, var)`` pairs of ``8 (var / gap + 2) ln T + alpha / (alpha - 2) * gap``."""
    if not alpha > 2.0:
        raise CatbreakError("INVALID_ALPHA", f"the bound needs alpha > 2, got {alpha}")
    if t_total < 1:
        raise CatbreakError("INVALID_ARG", "horizon must be at least 1")
    log_t = math.log(t_total)
    total = 0.0
    for gap, variance in arms:
        if not gap > 0.0:
            raise CatbreakError("INVALID_GAP", f"gap {gap} must be positive")
        total += 8.0 * (variance / gap + 2.0) * log_t + alpha / (alpha - 2.0) * gap
    return total


def bound_for_arms(arms: Sequence[ArmSpec], t_total: int, alpha: float) -> float:
    """``regret_bound`` over the suboptimal arms of ``arms``."""
    pairs = [(gap, arm.variance) for gap, arm in zip(gaps(arms), arms) if gap > 0.0]
    return regret_bound(pairs, t_total, alpha)


@dataclass(frozen=True)
class SimulationReport:
    bound: float | None
    empirical_regret_mean: float
    empirical_regret_std: float
    per_arm_pulls: list[float]
    seeds: int
    horizon: int
    alpha: float

    def to_dict(self) -> dict:
        return asdict(self)


def _draw(rng: np.random.Generator, arms: Sequence[ArmSpec], rows: int) -> np.ndarray:
    means = np.array([arm.mean for arm in arms])
    sds = np.sqrt([arm.variance for arm in arms])
    gaussian = np.array([arm.distribution is ArmDistribution.GAUSSIAN for arm in arms])
    signs = np.where(rng.random((rows, len(arms))) < 0.5, -1.0, 1.0)
    normal = rng.standard_normal((rows, len(arms)))
    upper = np.array([2.0 * arm.lam for arm in arms])
    clamped = np.clip(means + sds * normal, 0.0, upper)
    return np.where(gaussian, clamped, means + sds * signs)


def simulate_bandit(
    arms: Sequence[ArmSpec],
    horizon: int,
    alpha: float,
    seeds: Sequence[int],
    squared_alpha_bonus: bool = False,
) -> SimulationReport:
    """Run the UCB policy on stationary arms, one independent reward stream per seed.

    Every arm is pulled once first; afterwards round ``t`` (total pulls so far)
    pulls the arm with the highest score, ties to the lowest index. Regret is
    ``sum_l pulls_l * gap_l``.
    """
    num_arms = len(arms)
    if num_arms < 2:
        raise CatbreakError("INVALID_ARG", "at least two arms are required")
    if horizon < num_arms:
        raise CatbreakError("INVALID_ARG", f"horizon {horizon} is below the {num_arms} arms")
    if not seeds:
        raise CatbreakError("INVALID_ARG", "at least one seed is required")
    if alpha < 0.0:
        raise CatbreakError("INVALID_ARG", "alpha must be >= 0")

    rngs = [np.random.default_rng(seed) for seed in seeds]
    runs = len(rngs)
    pulls = np.zeros((runs, num_arms))
    means = np.zeros((runs, num_arms))
    m2 = np.zeros((runs, num_arms))
    rows = np.arange(runs)

    tape = np.empty((runs, 0, num_arms))
    offset = 0
    for step in range(horizon):
        if step - offset >= tape.shape[1]:
            offset = step
            tape = np.stack([_draw(rng, arms, TAPE_CHUNK) for rng in rngs])
        if step < num_arms:
            chosen = np.full(runs, step)
        else:
            variances = np.maximum(m2, 0.0) / pulls
            scores = ucb_scores(means, variances, pulls, step, alpha, squared_alpha_bonus)
            chosen = np.argmax(scores, axis=1)
        g = tape[rows, step - offset, chosen]
        pulls[rows, chosen] += 1.0
        delta = g - means[rows, chosen]
        means[rows, chosen] += delta / pulls[rows, chosen]
        m2[rows, chosen] += delta * (g - means[rows, chosen])

    regret = pulls @ gaps(arms)
    bound = bound_for_arms(arms, horizon, alpha) if alpha > 2.0 else None
    report = SimulationReport(
        bound=bound,
        empirical_regret_mean=float(regret.mean()),
        empirical_regret_std=float(regret.std()),
        per_arm_pulls=[float(x) for x in pulls.mean(axis=0)],
        seeds=runs,
        horizon=horizon,
        alpha=alpha,
    )
    logger.debug(
        "Simulated %d arms for %d rounds over %d seeds: regret %.3f, bound %s",
        num_arms, horizon, runs, report.empirical_regret_mean, bound,
    )
    return report
