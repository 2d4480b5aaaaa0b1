"""Solve the MFG system from the configured initial measure."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.exceptions import ConfigError
from fourier_mfg.services.mfg_solver import TimeGrid, solve_mfg
from fourier_mfg.services.serialization import write_solution_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the solve-mfg subcommand."""
    parser = subparsers.add_parser(
        "solve-mfg",
        help="solve the forward-backward MFG system",
        description="Damped Picard iteration from u = 0 on [time, horizon]; writes solution.csv.",
    )

    @handle_command_errors("solve-mfg")
    def solve_mfg_command(run: RunContext) -> None:
        config = run.config
        if config.time >= config.horizon:
            raise ConfigError("solve-mfg needs time < horizon")
        grid = TimeGrid(config.time, config.horizon, config.steps)
        solution = solve_mfg(run.initial_measure, run.model, grid, run.solver)
        write_solution_csv(run.path("solution.csv"), solution)
        run.metrics.update(
            cost=solution.cost,
            residual=solution.residual,
            fp_residual=solution.fp_residual,
            iterations=solution.iterations,
            mass_defect=solution.flow.mass_defect(),
            value_norm=solution.value_norm(),
        )

    parser.set_defaults(handler=solve_mfg_command)
