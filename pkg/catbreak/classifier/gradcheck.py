"""Central finite differences over the relaxed indicators."""

from __future__ import annotations

import numpy as np

from catbreak.categorical.instance import Instance
from catbreak.classifier.base import CategoricalModel, Objective
from catbreak.errors import CatbreakError


def finite_diff_grad(
    model: CategoricalModel,
    inst: Instance,
    objective: Objective | None = None,
    step: float = 1e-5,
) -> np.ndarray:
    """``(f(b + h e_ij) - f(b - h e_ij)) / 2h`` for every existing slot.

    The objective's active branch (the best wrong class for MARGIN) is fixed
    at the unperturbed point, matching what the analytic gradient
    differentiates.
    """
    if not step > 0.0:
        raise CatbreakError("INVALID_ARG", "step must be positive")
    model.check_instance(inst)
    objective = objective or Objective.margin()
    b0 = inst.indicators(model.values_per_feature)
    w = objective.weights(model.forward(b0[None])[0], inst.label)

    slots = np.argwhere(model.mask)
    batch = np.repeat(b0[None], 2 * len(slots), axis=0)
    rows = np.arange(len(slots))
    batch[2 * rows, slots[:, 0], slots[:, 1]] += step
    batch[2 * rows + 1, slots[:, 0], slots[:, 1]] -= step
    values = model.forward(batch) @ w

    grad = np.zeros_like(b0)
    grad[slots[:, 0], slots[:, 1]] = (values[0::2] - values[1::2]) / (2.0 * step)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> float:
    """``max |a - n| / max(|a|, |n|, floor)`` over all slots."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))
