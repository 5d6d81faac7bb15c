"""Benchmark orchestration: every (method, budget) cell over a dataset, in parallel."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from catbreak.attacks import METHODS, run_attack
from catbreak.attacks.common import AttackConfig
from catbreak.categorical.instance import Instance
from catbreak.categorical.io import read_dataset
from catbreak.classifier.base import CategoricalModel, margin_of
from catbreak.classifier.handle import ClassifierHandle
from catbreak.classifier.io import load_model
from catbreak.errors import CatbreakError

logger = logging.getLogger(__name__)

SR_DENOMINATORS = ("correct", "all")
UCB_METHODS = ("feat", "feat-b")
# error code recorded for a run that raised something other than CatbreakError
INTERNAL_ERROR = "INTERNAL"


@dataclass(frozen=True)
class BenchmarkSpec:
    model: str
    data: str
    methods: tuple[str, ...]
    budgets: tuple[int, ...]
    config: dict = field(default_factory=dict)
    overrides: dict[str, dict] = field(default_factory=dict)
    repetitions: int = 1
    seed: int = 0
    threads: int = 1
    sr_denominator: str = "correct"

    def __post_init__(self) -> None:
        if not self.methods or not self.budgets:
            raise CatbreakError("INVALID_ARG", "at least one method and one budget are required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise CatbreakError("INVALID_ARG", f"unknown methods {unknown}")
        if any(b < 0 for b in self.budgets):
            raise CatbreakError("INVALID_ARG", "budgets must be >= 0")
        if self.repetitions < 1 or self.threads < 1:
            raise CatbreakError("INVALID_ARG", "repetitions and threads must be >= 1")
        if self.sr_denominator not in SR_DENOMINATORS:
            raise CatbreakError("INVALID_ARG", f"sr_denominator must be one of {SR_DENOMINATORS}")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> "BenchmarkSpec":
        if not isinstance(data, dict):
            raise CatbreakError("FORMAT", "benchmark spec must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise CatbreakError("FORMAT", f"unknown benchmark keys {sorted(unknown)}")
        try:
            spec = cls(**data)
        except TypeError as err:
            raise CatbreakError("FORMAT", f"incomplete benchmark spec: {err}") from err
        if base_dir is not None:
            spec = replace(
                spec,
                model=str(Path(base_dir) / spec.model),
                data=str(Path(base_dir) / spec.data),
            )
        return spec

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise CatbreakError("FORMAT", f"{path}: {err.msg}") from err
        return cls.from_dict(data, base_dir=Path(path).parent)

    def attack_config(self, method: str, budget: int, seed: int) -> AttackConfig:
        settings = {**self.config, **self.overrides.get(method, {}), "budget": budget, "seed": seed}
        return AttackConfig().with_overrides(**settings)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricsRow:
    method: str
    budget: int
    attempted: int
    successes: int
    sr: float
    no_query: float | None
    no_change: float | None
    runtime: float | None
    failures: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BenchmarkOutcome:
    rows: list[MetricsRow]
    runs: list[dict]
    attacked: int
    excluded: int

    @property
    def failures(self) -> int:
        return sum(1 for run in self.runs if run.get("error"))


@dataclass(frozen=True)
class _Task:
    index: int
    method: str
    budget: int
    repetition: int
    instance: int


def run_seed(master: int, index: int) -> int:
    """Per-run seed from a counter-based split of the master seed."""
    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1)[0])


def correctly_classified(
    model: CategoricalModel, dataset: Sequence[Instance]
) -> list[int]:
    """Indices of instances with a negative margin (outside any query accounting)."""
    if not dataset:
        return []
    probs = model.confidences(list(dataset))
    return [i for i, inst in enumerate(dataset) if margin_of(probs[i], inst.label) < 0.0]


def _execute(
    spec: BenchmarkSpec, model: CategoricalModel, dataset: Sequence[Instance], task: _Task
) -> dict:
    seed = run_seed(spec.seed, task.index)
    record = {
        "task": task.index,
        "method": task.method,
        "budget": task.budget,
        "repetition": task.repetition,
        "instance": task.instance,
        "seed": seed,
    }
    handle = ClassifierHandle(model)
    try:
        cfg = spec.attack_config(task.method, task.budget, seed)
        result = run_attack(task.method, handle, dataset[task.instance], cfg)
    except CatbreakError as err:
        logger.error(
            "Run %d (%s, budget %d) failed: %s", task.index, task.method, task.budget, err,
            extra={"run": task.index, "method": task.method, "budget": task.budget},
        )
        record.update({"error": err.code, "message": str(err)})
        return record
    except Exception as err:
        logger.exception(
            "Run %d (%s, budget %d) crashed", task.index, task.method, task.budget,
            extra={"run": task.index, "method": task.method, "budget": task.budget},
        )
        record.update({"error": INTERNAL_ERROR, "message": f"{type(err).__name__}: {err}"})
        return record
    record.update(result.to_dict())
    record["handle_queries"] = handle.query_count
    return record


def aggregate(
    runs: Sequence[dict],
    methods: Sequence[str],
    budgets: Sequence[int],
    extra_attempts: int = 0,
) -> list[MetricsRow]:
    """One row per (method, budget); means over successful runs only, None when there are none."""
    rows = []
    for method in methods:
        for budget in budgets:
            cell = [r for r in runs if r["method"] == method and r["budget"] == budget]
            wins = [r for r in cell if not r.get("error") and r.get("success")]
            attempted = len(cell) + extra_attempts
            rows.append(
                MetricsRow(
                    method=method,
                    budget=budget,
                    attempted=attempted,
                    successes=len(wins),
                    sr=len(wins) / attempted if attempted else 0.0,
                    no_query=float(np.mean([r["queries"] for r in wins])) if wins else None,
                    no_change=float(np.mean([r["changed"] for r in wins])) if wins else None,
                    runtime=float(np.mean([r["wall_time"] for r in wins])) if wins else None,
                    failures=sum(1 for r in cell if r.get("error")),
                )
            )
    return rows


def run_benchmark(
    spec: BenchmarkSpec,
    model: CategoricalModel | None = None,
    dataset: Sequence[Instance] | None = None,
) -> BenchmarkOutcome:
    """Attack every correctly classified instance with every (method, budget) cell."""
    model = model if model is not None else load_model(spec.model)
    dataset = list(dataset) if dataset is not None else read_dataset(spec.data)
    targets = correctly_classified(model, dataset)
    excluded = len(dataset) - len(targets)
    if excluded:
        logger.info("Excluding %d already misclassified instances", excluded)

    tasks = []
    for method in spec.methods:
        for budget in spec.budgets:
            for repetition in range(spec.repetitions):
                for inst_index in targets:
                    tasks.append(_Task(len(tasks), method, budget, repetition, inst_index))
    logger.info(
        "Running %d attacks (%d methods x %d budgets x %d reps x %d instances) on %d threads",
        len(tasks), len(spec.methods), len(spec.budgets), spec.repetitions, len(targets),
        spec.threads,
    )

    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        runs = list(pool.map(lambda task: _execute(spec, model, dataset, task), tasks))

    extra = excluded * spec.repetitions if spec.sr_denominator == "all" else 0
    rows = aggregate(runs, spec.methods, spec.budgets, extra)
    for row in rows:
        logger.info(
            "%s budget=%d SR=%.3f (%d/%d)", row.method, row.budget, row.sr, row.successes,
            row.attempted,
        )
    return BenchmarkOutcome(rows, runs, len(targets), excluded)


def alpha_sweep(
    spec: BenchmarkSpec,
    alphas: Sequence[float],
    model: CategoricalModel | None = None,
    dataset: Sequence[Instance] | None = None,
) -> dict[float, BenchmarkOutcome]:
    """The benchmark's UCB methods rerun once per alpha."""
    if "feat" not in spec.methods:
        raise CatbreakError("INVALID_ARG", "alpha sweep needs feat among the methods")
    if not alphas:
        raise CatbreakError("INVALID_ARG", "at least one alpha is required")
    model = model if model is not None else load_model(spec.model)
    dataset = list(dataset) if dataset is not None else read_dataset(spec.data)
    methods = tuple(m for m in spec.methods if m in UCB_METHODS)
    outcomes = {}
    for alpha in alphas:
        logger.info("Alpha sweep: alpha=%s", alpha)
        swept = replace(spec, methods=methods, config={**spec.config, "alpha": float(alpha)})
        outcomes[float(alpha)] = run_benchmark(swept, model, dataset)
    return outcomes
