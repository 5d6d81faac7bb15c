"""Reward drift inside one UCB window, and margin gains along an attack trace."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from catbreak.analysis.sensitivity import SensitivityReport
from catbreak.attacks.common import AttackConfig, AttackResult, AttackRun, best_value_pull
from catbreak.attacks.feat import gradient_ranker, run_feat
from catbreak.categorical.instance import Instance
from catbreak.categorical.perturbation import admissible_values
from catbreak.classifier.base import margin_of
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StationarityReport:
    features: tuple[int, ...]
    ratios: tuple[float, ...]
    window: int
    measure: str
    rewards: dict[int, list[float]] = field(default_factory=dict)
    # readings taken relative to the instance they edit, not the attack reward
    marginal: bool = True

    def fraction_below(self, threshold: float) -> float:
        if not self.ratios:
            return 0.0
        return float(np.mean(np.asarray(self.ratios) <= threshold))

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "ratios": list(self.ratios),
            "window": self.window,
            "measure": self.measure,
            "marginal": self.marginal,
            "rewards": {str(f): values for f, values in self.rewards.items()},
        }


def stationarity_ratio(
    handle: ClassifierHandle,
    inst: Instance,
    features: Sequence[int],
    window: int,
    cfg: AttackConfig | None = None,
    use_variance: bool = False,
    marginal: bool = True,
) -> StationarityReport:
    """Run one FEAT window of ``window`` rounds, reading each listed feature's best reward.

    A reading is taken on the window's starting instance and after every round
    but the last, and stops once the attack flips the label. Each reading pulls
    the feature on the current instance through a forked handle, so the
    attack's own query count is untouched. With ``marginal`` the reading is
    ``lam + margin(edited) - margin(current)``, which leaves out the drift the
    other edits cause; otherwise it is the attack's reward. The ratio is
    ``std / mean`` of the readings, or ``var / mean`` with ``use_variance``.
    """
    if window < 2:
        raise CatbreakError("INVALID_ARG", "the window needs at least two rounds")
    cfg = (cfg or AttackConfig()).with_overrides(tau=window, budget=window)
    counts = handle.values_per_feature
    tracked = [f for f in features if admissible_values(inst, f, counts, cfg.allow_delete)]
    side = handle.fork()
    rewards: dict[int, list[float]] = {f: [] for f in tracked}
    conf_orig = side.predict(inst)
    if margin_of(conf_orig, inst.label) >= 0.0:
        raise CatbreakError("INVALID_ARG", "the instance is already misclassified")

    def read(x_hat: Instance, probs: np.ndarray) -> None:
        current = margin_of(probs, inst.label)
        for feature in tracked:
            pull = best_value_pull(
                side, x_hat, feature, conf_orig, cfg.lam, cfg.reward_variant, cfg.allow_delete
            )
            if marginal:
                rewards[feature].append(cfg.lam + margin_of(pull.probs, inst.label) - current)
            else:
                rewards[feature].append(pull.reward)

    def after_round(rnd: int, x_hat: Instance, probs: np.ndarray) -> None:
        if rnd < window and margin_of(probs, inst.label) < 0.0:
            read(x_hat, probs)

    read(inst, conf_orig)
    run = AttackRun("feat", handle, inst, cfg)
    run_feat(run, gradient_ranker(handle, cfg), on_round=after_round)

    ratios = []
    for feature in tracked:
        values = np.asarray(rewards[feature])
        spread = values.var() if use_variance else values.std()
        mean = values.mean()
        ratios.append(float(spread / mean) if mean > 0.0 else 0.0)
    measure = "var/mean" if use_variance else "std/mean"
    logger.debug("Stationarity %s over %d features: %s", measure, len(tracked), ratios)
    return StationarityReport(tuple(tracked), tuple(ratios), window, measure, rewards, marginal)


def compare_stationarity(
    handle: ClassifierHandle,
    inst: Instance,
    sensitivity: SensitivityReport,
    k: int,
    window: int,
    cfg: AttackConfig | None = None,
    use_variance: bool = False,
    marginal: bool = True,
) -> dict[str, StationarityReport]:
    """Ratios for the ``k`` most and the ``k`` least sensitive features."""
    ranking = sensitivity.ranking()
    return {
        "sensitive": stationarity_ratio(
            handle, inst, ranking[:k], window, cfg, use_variance, marginal
        ),
        "insensitive": stationarity_ratio(
            handle, inst, ranking[::-1][:k], window, cfg, use_variance, marginal
        ),
    }


def marginal_gains(result: AttackResult) -> list[float]:
    """Successive increases of the best margin reached along the trace."""
    best = [r.margin for r in result.trace if r.margin is not None]
    running = np.maximum.accumulate(best) if best else np.zeros(0)
    return [float(x) for x in np.diff(running)]
