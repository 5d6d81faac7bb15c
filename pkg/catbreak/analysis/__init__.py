"""Empirical checks: sensitivity, gradient fidelity, stationarity and query complexity."""

from catbreak.analysis.complexity import complexity_formula, fsgs_iteration_queries
from catbreak.analysis.fidelity import (
    FidelityReport,
    gradient_indicator_fidelity,
    instance_fidelity,
    true_changes,
)
from catbreak.analysis.sensitivity import (
    SensitivityReport,
    SensitivityRule,
    SensitivityTarget,
    feature_sensitivity,
)
from catbreak.analysis.stationarity import (
    StationarityReport,
    compare_stationarity,
    marginal_gains,
    stationarity_ratio,
)

__all__ = [
    "FidelityReport",
    "SensitivityReport",
    "SensitivityRule",
    "SensitivityTarget",
    "StationarityReport",
    "compare_stationarity",
    "complexity_formula",
    "feature_sensitivity",
    "fsgs_iteration_queries",
    "gradient_indicator_fidelity",
    "instance_fidelity",
    "marginal_gains",
    "stationarity_ratio",
    "true_changes",
]
