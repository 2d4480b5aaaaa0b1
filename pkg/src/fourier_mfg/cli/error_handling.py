"""Centralized error handling decorator for CLI subcommands."""

from __future__ import annotations

import argparse
import functools
import logging
import traceback
from collections.abc import Callable

from pydantic import ValidationError

from fourier_mfg.cli.run_context import RunContext, open_run
from fourier_mfg.exceptions import ConfigError, DimensionMismatchError, FourierMfgError, ResolutionError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_ERROR_CATEGORIES: dict[type[Exception], str] = {
    ValidationError: "config",
    ConfigError: "config",
    ResolutionError: "config",
    DimensionMismatchError: "config",
    FileNotFoundError: "config",
    FourierMfgError: "numerical",
}

_EXIT_CODES = {"config": EXIT_CONFIG, "numerical": EXIT_NUMERICAL, "internal": EXIT_INTERNAL}

CommandHandler = Callable[[RunContext], int | None]


def _classify_error(exc: Exception) -> str:
    """Classify exception into error category."""
    for exc_type, category in _ERROR_CATEGORIES.items():
        if isinstance(exc, exc_type):
            return category
    return "internal"


def _diagnostic(exc: Exception) -> str:
    lines = [f"error: {type(exc).__name__}", f"message: {exc}"]
    for name, attribute in sorted(vars(exc).items()):
        if not name.startswith("_"):
            lines.append(f"{name}: {attribute!r}")
    lines.append("")
    lines.extend(traceback.format_exception(exc))
    return "\n".join(lines)


def handle_command_errors(subcommand: str) -> Callable[[CommandHandler], Callable[[argparse.Namespace], int]]:
    """Decorator factory turning a subcommand body into an exit status.

    The wrapped body receives an opened ``RunContext``. Config errors exit 2,
    numerical failures exit 3 and leave ``diagnostic.txt`` in the run
    directory, anything else exits 1 with a logged traceback.

    Args:
        subcommand: Name used for the output directory and the run summary.
    """

    def decorator(func: CommandHandler) -> Callable[[argparse.Namespace], int]:
        @functools.wraps(func)
        def wrapper(args: argparse.Namespace) -> int:
            run: RunContext | None = None
            try:
                run = open_run(args, subcommand)
                code = func(run) or EXIT_OK
                run.finish("ok" if code == EXIT_OK else "failed")
                return code
            except Exception as e:
                category = _classify_error(e)
                logger.error(
                    "Command %s failed [%s]: %s",
                    subcommand,
                    category,
                    e,
                    exc_info=category == "internal",
                )
                if run is not None:
                    if category == "numerical":
                        run.write_text("diagnostic.txt", _diagnostic(e))
                    run.metrics["error"] = str(e)
                    run.finish(category)
                return _EXIT_CODES[category]

        return wrapper

    return decorator
