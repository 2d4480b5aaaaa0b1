"""Logging setup for fourier-mfg runs.

Records go to stderr; stdout stays free for command output. While a CLI run is
open every record carries the subcommand and run name, so interleaved logs from
several runs can be told apart.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import UTC, datetime
from typing import Literal

TEXT_FORMAT = "%(asctime)s %(levelname)-7s [%(run)s] %(name)s: %(message)s"
_NO_RUN = "-"


class RunFilter(logging.Filter):
    """Stamps ``run`` (``subcommand/name``) onto every record passing the handler."""

    def __init__(self) -> None:
        super().__init__()
        self.run = _NO_RUN

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "run"):
            record.run = self.run
        return True


class JsonFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, object] = {
            "timestamp": datetime.fromtimestamp(record.created, UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        run = getattr(record, "run", _NO_RUN)
        if run != _NO_RUN:
            payload["run"] = run
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload)


_run_filter = RunFilter()


def bind_run(subcommand: str, name: str) -> None:
    """Tag subsequent records with the open run."""
    _run_filter.run = f"{subcommand}/{name}"


def setup_logging(level: str = "INFO", format: Literal["text", "json"] = "text") -> logging.Handler:
    """Install a single stderr handler on the root logger.

    Args:
        level: Level name; unknown names fall back to INFO.
        format: ``text`` for people, ``json`` for one object per line.

    Returns:
        The installed handler.
    """
    log_level = getattr(logging, level.upper(), None)
    if not isinstance(log_level, int):
        log_level = logging.INFO

    formatter: logging.Formatter = JsonFormatter() if format == "json" else logging.Formatter(TEXT_FORMAT)
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(log_level)
    handler.setFormatter(formatter)
    handler.addFilter(_run_filter)

    root = logging.getLogger()
    for existing in root.handlers[:]:
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(log_level)
    logging.getLogger("fourier_mfg").setLevel(log_level)
    return handler
