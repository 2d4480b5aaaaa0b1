"""Compare the Fokker-Planck flow of the equilibrium feedback with its F_N truncation."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.exceptions import ConfigError
from fourier_mfg.services.characteristics import truncation_error
from fourier_mfg.services.mfg_solver import TimeGrid, solve_mfg
from fourier_mfg.services.serialization import write_truncation_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the truncation-error subcommand."""
    parser = subparsers.add_parser(
        "truncation-error",
        help="W1 distance between m_t and its truncation, per unit time (d = 1)",
        description=(
            "Solves the MFG from (time, initial_measure), transports the initial measure with the equilibrium "
            "feedback and writes eta(t) to truncation.csv."
        ),
    )

    @handle_command_errors("truncation-error")
    def truncation_error_command(run: RunContext) -> None:
        config = run.config
        if config.time >= config.horizon:
            raise ConfigError("truncation-error needs time < horizon")
        grid = TimeGrid(config.time, config.horizon, config.steps)
        solution = solve_mfg(run.initial_measure, run.model, grid, run.solver)
        report = truncation_error(run.initial_measure, solution.feedback, grid, config.order, config.bound_c)
        write_truncation_csv(run.path("truncation.csv"), report)
        run.metrics.update(sup_eta=report.sup_eta, positivity_time=report.positivity_time)

    parser.set_defaults(handler=truncation_error_command)
