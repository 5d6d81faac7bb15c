"""Benchmark outputs: metrics.csv, runs.jsonl and report.json."""

from __future__ import annotations

import csv
import json
import logging
import os
import platform
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy

from catbreak import __version__
from catbreak.bench.runner import BenchmarkOutcome, BenchmarkSpec, MetricsRow

logger = logging.getLogger(__name__)

METRICS_HEADER = (
    "method", "budget", "attempted", "successes", "sr", "no_query", "no_change", "runtime",
    "failures",
)
NOT_AVAILABLE = "N/A"


def hardware_info() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _cell(value) -> str:
    if value is None:
        return NOT_AVAILABLE
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_metrics_csv(path: str | Path, rows: Iterable[MetricsRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(METRICS_HEADER)
        for row in rows:
            data = row.to_dict()
            writer.writerow([_cell(data[key]) for key in METRICS_HEADER])


def write_runs_jsonl(path: str | Path, runs: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for run in runs:
            handle.write(json.dumps(run) + "\n")
            count += 1
    return count


def read_runs_jsonl(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def build_report(spec: BenchmarkSpec, outcome: BenchmarkOutcome, extra: dict | None = None) -> dict:
    return {
        "version": __version__,
        "config": spec.to_dict(),
        "hardware": hardware_info(),
        "attacked": outcome.attacked,
        "excluded": outcome.excluded,
        "failures": outcome.failures,
        # No.query, No.change and Runtime average successful runs only
        "averaging": "successful-runs",
        "metrics": [row.to_dict() for row in outcome.rows],
        **(extra or {}),
    }


def write_benchmark(
    out_dir: str | Path, spec: BenchmarkSpec, outcome: BenchmarkOutcome, prefix: str = ""
) -> dict[str, Path]:
    """Write the three benchmark outputs under ``out_dir``; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out / f"{prefix}metrics.csv",
        "runs": out / f"{prefix}runs.jsonl",
        "report": out / f"{prefix}report.json",
    }
    write_metrics_csv(paths["metrics"], outcome.rows)
    write_runs_jsonl(paths["runs"], outcome.runs)
    paths["report"].write_text(
        json.dumps(build_report(spec, outcome), indent=2) + "\n", encoding="utf-8"
    )
    logger.info("Wrote benchmark outputs to %s", out)
    return paths


def alpha_table(outcomes: dict[float, BenchmarkOutcome]) -> list[dict]:
    """Rows of (alpha, method, budget, runtime, no_query, sr)."""
    table = []
    for alpha, outcome in outcomes.items():
        for row in outcome.rows:
            table.append(
                {
                    "alpha": alpha,
                    "method": row.method,
                    "budget": row.budget,
                    "runtime": row.runtime,
                    "no_query": row.no_query,
                    "sr": row.sr,
                }
            )
    return table


def render_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Plain aligned text table for terminal output."""
    cells = [[_cell(row.get(col)) for col in columns] for row in rows]
    widths = [max([len(col)] + [len(r[i]) for r in cells]) for i, col in enumerate(columns)]
    lines = ["  ".join(col.ljust(w) for col, w in zip(columns, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)
