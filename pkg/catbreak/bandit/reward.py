"""Per-pull reward: best wrong-class confidence minus the true-class baseline, shifted by Λ."""

from __future__ import annotations

from enum import Enum

import numpy as np

from catbreak.classifier.base import best_wrong_class
from catbreak.errors import CatbreakError


class RewardVariant(str, Enum):
    # baseline taken on the perturbed instance itself
    PERTURBED_BASE = "perturbed"
    # baseline taken on the unperturbed instance
    ORIGINAL_BASE = "original"


def reward(
    conf_pert: np.ndarray,
    conf_base: np.ndarray,
    true_label: int,
    lam: float = 1.0,
) -> float:
    """``max_{k != true} conf_pert[k] - conf_base[true] + lam``; lies in ``[lam - 1, lam + 1]``."""
    conf_pert = np.asarray(conf_pert, dtype=np.float64)
    conf_base = np.asarray(conf_base, dtype=np.float64)
    if conf_pert.ndim != 1 or conf_pert.shape != conf_base.shape:
        raise CatbreakError(
            "SHAPE_MISMATCH", f"confidence shapes {conf_pert.shape} and {conf_base.shape}"
        )
    if not 0 <= true_label < conf_pert.size:
        raise CatbreakError("SHAPE_MISMATCH", f"label {true_label} outside [0, {conf_pert.size})")
    best = conf_pert[best_wrong_class(conf_pert, true_label)]
    return float(best - conf_base[true_label] + lam)


def variant_reward(
    conf_pert: np.ndarray,
    conf_orig: np.ndarray,
    true_label: int,
    lam: float,
    variant: RewardVariant,
) -> float:
    """Reward under ``variant`` given the perturbed and the original confidences."""
    base = conf_pert if variant is RewardVariant.PERTURBED_BASE else conf_orig
    return reward(conf_pert, base, true_label, lam)


def batch_rewards(
    probs: np.ndarray,
    conf_orig: np.ndarray,
    true_label: int,
    lam: float,
    variant: RewardVariant,
) -> np.ndarray:
    """Vectorized ``variant_reward`` over the rows of ``probs``."""
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    wrong = probs.copy()
    wrong[:, true_label] = -np.inf
    if variant is RewardVariant.PERTURBED_BASE:
        base = probs[:, true_label]
    else:
        base = np.full(probs.shape[0], float(conf_orig[true_label]))
    return wrong.max(axis=1) - base + lam
