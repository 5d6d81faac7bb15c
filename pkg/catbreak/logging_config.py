"""Logging configuration for catbreak runs."""

from __future__ import annotations

import json
import logging
import os
import sys
from logging import LogRecord

DEV_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - "
    "[%(module)s:%(funcName)s:%(lineno)d] - %(message)s"
)

# attributes every LogRecord carries; anything else came in through ``extra=``
_RECORD_ATTRS = frozenset(
    vars(LogRecord("", 0, "", 0, "", (), None)).keys() | {"message", "asctime"}
)


def record_context(record: LogRecord) -> dict:
    """Fields attached with ``logger.<level>(..., extra={...})``."""
    return {
        key: value
        for key, value in vars(record).items()
        if key not in _RECORD_ATTRS and not key.startswith("_")
    }


class JsonFormatter(logging.Formatter):
    """One JSON object per record, with ``extra`` fields under ``context``."""

    def format(self, record: LogRecord) -> str:
        payload = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        context = record_context(record)
        if context:
            payload["context"] = context
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


def setup_logging(level: str | None = None, env: str | None = None) -> logging.Logger:
    """Point the root logger at stdout; JSON lines when ``env`` is production."""
    env = env or os.getenv("CATBREAK_ENV", "development")
    name = (level or os.getenv("CATBREAK_LOG_LEVEL", "INFO")).upper()
    numeric_level = getattr(logging, name, None)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    root = logging.getLogger()
    root.setLevel(numeric_level)
    root.handlers.clear()

    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(numeric_level)
    handler.setFormatter(JsonFormatter() if env == "production" else logging.Formatter(DEV_FORMAT))
    root.addHandler(handler)

    if name != logging.getLevelName(numeric_level):
        root.warning("Unknown log level %r; using INFO", name)
    return root
