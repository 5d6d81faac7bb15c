"""Categorical instances, embeddings and perturbations."""

from catbreak.categorical.instance import (
    ABSENT,
    EmbeddingTable,
    Instance,
    RelaxedIndicators,
    slot_mask,
    stack_tensor,
)
from catbreak.categorical.perturbation import (
    Edit,
    EditKind,
    Perturbation,
    admissible_values,
    apply_perturbation,
    diff,
    edit_for,
    inverse,
    perturbation_between,
)

__all__ = [
    "ABSENT",
    "Edit",
    "EditKind",
    "EmbeddingTable",
    "Instance",
    "Perturbation",
    "RelaxedIndicators",
    "admissible_values",
    "apply_perturbation",
    "diff",
    "edit_for",
    "inverse",
    "perturbation_between",
    "slot_mask",
    "stack_tensor",
]
