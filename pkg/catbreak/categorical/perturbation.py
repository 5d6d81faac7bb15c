"""Feature edits (insert / delete / substitute) and the ``diff`` budget measure."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from catbreak.categorical.instance import Instance
from catbreak.errors import CatbreakError


class EditKind(str, Enum):
    INSERT = "insert"
    DELETE = "delete"
    SUBSTITUTE = "substitute"


@dataclass(frozen=True)
class Edit:
    feature: int
    kind: EditKind
    new_value: int | None = None

    def to_dict(self) -> dict:
        return {"feature": self.feature, "kind": self.kind.value, "new_value": self.new_value}


@dataclass(frozen=True)
class Perturbation:
    """A set of edits on pairwise-distinct features, kept sorted by feature."""

    edits: tuple[Edit, ...] = ()

    def __post_init__(self) -> None:
        edits = tuple(sorted(self.edits, key=lambda edit: edit.feature))
        features = [edit.feature for edit in edits]
        if len(set(features)) != len(features):
            raise CatbreakError("DUPLICATE_FEATURE", "edits repeat a feature")
        object.__setattr__(self, "edits", edits)

    @classmethod
    def of(cls, edits: Iterable[Edit]) -> "Perturbation":
        return cls(tuple(edits))

    @property
    def features(self) -> frozenset[int]:
        return frozenset(edit.feature for edit in self.edits)

    def __len__(self) -> int:
        return len(self.edits)

    def to_list(self) -> list[dict]:
        return [edit.to_dict() for edit in self.edits]


def edit_for(inst: Instance, feature: int, new_value: int | None) -> Edit:
    """The single edit that sets ``feature`` to ``new_value`` on ``inst``."""
    current = inst.categories[feature]
    if new_value is None:
        return Edit(feature, EditKind.DELETE)
    if current is None:
        return Edit(feature, EditKind.INSERT, new_value)
    return Edit(feature, EditKind.SUBSTITUTE, new_value)


def _check_edit(inst: Instance, edit: Edit) -> None:
    if not 0 <= edit.feature < inst.num_features:
        raise CatbreakError("INVALID_EDIT", f"feature {edit.feature} out of range")
    current = inst.categories[edit.feature]
    if edit.kind is EditKind.INSERT:
        if current is not None:
            raise CatbreakError("INVALID_EDIT", f"insert on present feature {edit.feature}")
        if edit.new_value is None:
            raise CatbreakError("INVALID_EDIT", "insert needs a value")
    elif edit.kind is EditKind.DELETE:
        if current is None:
            raise CatbreakError("INVALID_EDIT", f"delete on absent feature {edit.feature}")
        if edit.new_value is not None:
            raise CatbreakError("INVALID_EDIT", "delete takes no value")
    else:
        if current is None:
            raise CatbreakError("INVALID_EDIT", f"substitute on absent feature {edit.feature}")
        if edit.new_value is None or edit.new_value == current:
            raise CatbreakError(
                "INVALID_EDIT", f"substitute on feature {edit.feature} must change the value"
            )
    if edit.new_value is not None and edit.new_value < 0:
        raise CatbreakError("INVALID_EDIT", "values must be non-negative")


def apply_perturbation(inst: Instance, p: Perturbation) -> Instance:
    """Return a new instance with ``p`` applied; ``inst`` is left untouched."""
    for edit in p.edits:
        _check_edit(inst, edit)
    return inst.with_values({edit.feature: edit.new_value for edit in p.edits})


def diff(a: Instance, b: Instance) -> frozenset[int]:
    """Features whose indicator rows differ between ``a`` and ``b``."""
    if a.num_features != b.num_features:
        raise CatbreakError(
            "SHAPE_MISMATCH", f"{a.num_features} vs {b.num_features} features"
        )
    return frozenset(
        i for i, (x, y) in enumerate(zip(a.categories, b.categories)) if x != y
    )


def perturbation_between(a: Instance, b: Instance) -> Perturbation:
    """The edit set turning ``a`` into ``b``."""
    return Perturbation.of(edit_for(a, i, b.categories[i]) for i in sorted(diff(a, b)))


def inverse(p: Perturbation, inst: Instance) -> Perturbation:
    """Edits undoing ``p`` once it has been applied to ``inst``."""
    perturbed = apply_perturbation(inst, p)
    return perturbation_between(perturbed, inst)


def admissible_values(
    inst: Instance,
    feature: int,
    values_per_feature: Sequence[int],
    allow_delete: bool = False,
) -> tuple[int | None, ...]:
    """Values a single edit of ``feature`` may set, ``None`` meaning delete."""
    current = inst.categories[feature]
    count = values_per_feature[feature]
    if current is None:
        return tuple(range(count))
    values: tuple[int | None, ...] = tuple(j for j in range(count) if j != current)
    if allow_delete:
        values += (None,)
    return values
