"""Weak master-equation residual at one mode, cross-checked against the HJB residual."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.config import parse_index
from fourier_mfg.services.hjb_checker import hjb_residual_gradient, master_residual
from fourier_mfg.services.mfcp import value
from fourier_mfg.services.serialization import write_report_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the master-residual subcommand."""
    parser = subparsers.add_parser(
        "master-residual",
        help="evaluate the weak master residual at mode_index",
        description=(
            "Master residual with its terms (master_residual.csv) and the finite-difference derivative of the "
            "HJB residual at the same mode (residual_gradient.csv)."
        ),
    )

    @handle_command_errors("master-residual")
    def master_residual_command(run: RunContext) -> None:
        config = run.config
        k = parse_index(config.mode_index, config.dim)
        probe = value(config.time, run.initial_measure, run.model, run.solver, cache=run.cache)
        master = master_residual(probe, run.model, run.solver, k, run.cache)
        gradient = hjb_residual_gradient(probe, run.model, run.solver, k, run.cache)
        write_report_csv(run.path("master_residual.csv"), [master])
        write_report_csv(run.path("residual_gradient.csv"), [gradient])
        run.metrics.update(
            residual=abs(master.value),
            gradient=abs(gradient.value),
            gap=abs(master.value - gradient.value),
            truncation_error=gradient.truncation_error,
        )

    parser.set_defaults(handler=master_residual_command)
