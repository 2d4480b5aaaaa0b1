"""Generalized HJB residual at the configured probe."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.services.hjb_checker import derivative_bounds, hjb_residual
from fourier_mfg.services.mfcp import value
from fourier_mfg.services.serialization import write_report_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the hjb-residual subcommand."""
    parser = subparsers.add_parser(
        "hjb-residual",
        help="evaluate the Fourier-truncated HJB residual",
        description="Residual with its signed terms (hjb_residual.csv) and the derivative bounds (bounds.csv).",
    )

    @handle_command_errors("hjb-residual")
    def hjb_residual_command(run: RunContext) -> None:
        config = run.config
        probe = value(config.time, run.initial_measure, run.model, run.solver, cache=run.cache)
        report = hjb_residual(probe, run.model, run.solver, config.bound_c, config.derivative_source, run.cache)
        bounds = derivative_bounds(probe)
        write_report_csv(run.path("hjb_residual.csv"), [report])
        write_report_csv(run.path("bounds.csv"), [bounds])
        run.metrics.update(
            residual=report.residual,
            sup_gradient=bounds.sup_gradient,
            weighted_sum=bounds.weighted_sum,
        )

    parser.set_defaults(handler=hjb_residual_command)
