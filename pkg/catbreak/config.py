"""Environment-driven settings."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

from dotenv import find_dotenv, load_dotenv

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Invalid %s=%r; using default %d", name, raw, default)
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning("Invalid %s=%r; using default %s", name, raw, default)
        return default


@dataclass(frozen=True)
class Settings:
    env: str = "development"
    log_level: str = "INFO"
    threads: int = 1
    out_dir: str = "out"
    seed: int = 0
    time_limit: float = 60.0
    fsgs_subset_cap: int = 4096
    exhaustive_limit: int = 1_000_000


def load_settings(dotenv: bool = True) -> Settings:
    """Build settings from ``CATBREAK_*`` variables (and a local ``.env``)."""
    if dotenv:
        load_dotenv(find_dotenv(usecwd=True))
    return Settings(
        env=os.getenv("CATBREAK_ENV", "development"),
        log_level=os.getenv("CATBREAK_LOG_LEVEL", "INFO"),
        threads=max(1, _env_int("CATBREAK_THREADS", 1)),
        out_dir=os.getenv("CATBREAK_OUT_DIR", "out"),
        seed=_env_int("CATBREAK_SEED", 0),
        time_limit=max(1e-3, _env_float("CATBREAK_TIME_LIMIT", 60.0)),
        fsgs_subset_cap=max(1, _env_int("CATBREAK_FSGS_SUBSET_CAP", 4096)),
        exhaustive_limit=max(1, _env_int("CATBREAK_EXHAUSTIVE_LIMIT", 1_000_000)),
    )
