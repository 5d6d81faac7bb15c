"""Attack methods behind one contract, dispatched by name."""

from __future__ import annotations

from typing import Callable

from catbreak.attacks.common import (
    AttackConfig,
    AttackResult,
    ScoreRule,
    StopReason,
    TraceRecord,
    best_value_pull,
    check_success,
    feature_scores,
    omp_rank,
    rank_features,
)
from catbreak.attacks.exhaustive import exhaustive_attack
from catbreak.attacks.feat import feat_attack, feat_b_attack
from catbreak.attacks.gradattack import grad_attack
from catbreak.attacks.greedy import fsgs_attack, ompgs_attack
from catbreak.categorical.instance import Instance
from catbreak.classifier.handle import ClassifierHandle
from catbreak.errors import CatbreakError

AttackFn = Callable[[ClassifierHandle, Instance, AttackConfig], AttackResult]

METHODS: dict[str, AttackFn] = {
    "feat": feat_attack,
    "feat-b": feat_b_attack,
    "fsgs": fsgs_attack,
    "ompgs": ompgs_attack,
    "gradattack": grad_attack,
    "exhaustive": exhaustive_attack,
}

# methods that need gradients
WHITE_BOX_METHODS = frozenset({"feat", "ompgs", "gradattack"})


def run_attack(
    method: str, handle: ClassifierHandle, inst: Instance, cfg: AttackConfig | None = None
) -> AttackResult:
    try:
        attack = METHODS[method]
    except KeyError as err:
        raise CatbreakError(
            "INVALID_ARG", f"unknown method {method!r}; choose from {sorted(METHODS)}"
        ) from err
    return attack(handle, inst, cfg or AttackConfig())


__all__ = [
    "METHODS",
    "WHITE_BOX_METHODS",
    "AttackConfig",
    "AttackResult",
    "ScoreRule",
    "StopReason",
    "TraceRecord",
    "best_value_pull",
    "check_success",
    "exhaustive_attack",
    "feat_attack",
    "feat_b_attack",
    "feature_scores",
    "fsgs_attack",
    "grad_attack",
    "omp_rank",
    "ompgs_attack",
    "rank_features",
    "run_attack",
]
