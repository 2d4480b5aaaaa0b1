"""Run the acceptance battery."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import EXIT_NUMERICAL, handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.services.acceptance import CHECKS, run_suite
from fourier_mfg.services.serialization import write_report_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the suite subcommand."""
    parser = subparsers.add_parser(
        "suite",
        help="run the acceptance checks",
        description="Runs every check (or those named with --check) and writes suite.csv; exits 3 on any failure.",
    )
    parser.add_argument(
        "--check",
        action="append",
        choices=sorted(CHECKS),
        dest="checks",
        help="run only this check (repeatable)",
    )

    @handle_command_errors("suite")
    def suite_command(run: RunContext) -> int | None:
        summary = run_suite(run.config, run.args.checks, run.cache)
        write_report_csv(run.path("suite.csv"), summary.checks, exclude={"seconds"})
        run.metrics.update(passed=summary.passed, failed=summary.failed)
        for result in summary.checks:
            logger.info("%-24s %s %s", result.name, result.status, result.detail)
        return None if summary.ok else EXIT_NUMERICAL

    parser.set_defaults(handler=suite_command)
