"""Dataset generation, benchmark orchestration and reports."""

from catbreak.bench.datagen import gen_dataset
from catbreak.bench.reports import (
    alpha_table,
    build_report,
    hardware_info,
    read_runs_jsonl,
    render_table,
    write_benchmark,
    write_metrics_csv,
    write_runs_jsonl,
)
from catbreak.bench.runner import (
    INTERNAL_ERROR,
    BenchmarkOutcome,
    BenchmarkSpec,
    MetricsRow,
    aggregate,
    alpha_sweep,
    correctly_classified,
    run_benchmark,
    run_seed,
)

__all__ = [
    "INTERNAL_ERROR",
    "BenchmarkOutcome",
    "BenchmarkSpec",
    "MetricsRow",
    "aggregate",
    "alpha_sweep",
    "alpha_table",
    "build_report",
    "correctly_classified",
    "gen_dataset",
    "hardware_info",
    "read_runs_jsonl",
    "render_table",
    "run_benchmark",
    "run_seed",
    "write_benchmark",
    "write_metrics_csv",
    "write_runs_jsonl",
]
