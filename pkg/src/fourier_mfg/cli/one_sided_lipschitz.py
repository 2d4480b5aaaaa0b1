"""Monte-Carlo weak one-sided Lipschitz test of the configured field."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import EXIT_NUMERICAL, handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.config import parse_index_values, parse_matrix
from fourier_mfg.models.enums import CheckStatus
from fourier_mfg.services.hjb_checker import one_sided_lipschitz_test
from fourier_mfg.services.serialization import report_row, write_report_csv
from fourier_mfg.spectral.measure import FourierMeasure

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the one-sided-lipschitz subcommand."""
    parser = subparsers.add_parser(
        "one-sided-lipschitz",
        help="weak one-sided Lipschitz test of a mollified coefficient field",
        description=(
            "Tests the configured field at initial_measure in the direction lipschitz_direction with the "
            "matrix lipschitz_matrix; exits 3 when the test fails beyond the Monte-Carlo error."
        ),
    )

    @handle_command_errors("one-sided-lipschitz")
    def one_sided_lipschitz_command(run: RunContext) -> int | None:
        config = run.config
        direction = parse_index_values(config.lipschitz_direction, config.dim)
        z = FourierMeasure.from_mapping(config.dim, config.order, direction).coeffs
        matrix = parse_matrix(config.lipschitz_matrix, config.dim)
        report = one_sided_lipschitz_test(
            run.field,
            run.initial_measure,
            z,
            matrix,
            config.epsilon,
            config.mollifier_radius,
            n_mc=config.n_mc,
            seed=config.seed,
            constant=config.lipschitz_constant,
            bound_c=config.bound_c,
            resolution=config.resolution,
        )
        write_report_csv(run.path("lipschitz.csv"), [report])
        run.metrics.update(report_row(report))
        if report.status is CheckStatus.FAILED:
            logger.warning("One-sided Lipschitz test failed: %.4g > %.4g", report.lhs, report.rhs_bound)
            return EXIT_NUMERICAL
        return None

    parser.set_defaults(handler=one_sided_lipschitz_command)
