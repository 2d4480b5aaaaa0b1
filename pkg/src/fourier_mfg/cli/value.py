"""Value function probe V(t, m) with its superjet."""

from __future__ import annotations

import argparse
import logging

import numpy as np

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.config import parse_vector
from fourier_mfg.services.mfcp import dpp_residual, semiconcavity_gap, value
from fourier_mfg.services.serialization import format_measure, write_probe_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the value subcommand."""
    parser = subparsers.add_parser(
        "value",
        help="evaluate the value function and its coefficient derivatives",
        description=(
            "Multi-start search over MFG equilibria at (time, initial_measure). Writes probe.csv with the value, "
            "d_{m^k}V per mode and every candidate cost; tau adds the dynamic-programming residual."
        ),
    )

    @handle_command_errors("value")
    def value_command(run: RunContext) -> None:
        config = run.config
        m = run.initial_measure
        probe = value(config.time, m, run.model, run.solver, cache=run.cache)
        run.write_text("measure.txt", format_measure(m))
        write_probe_csv(run.path("probe.csv"), probe)
        run.metrics.update(
            value=probe.value,
            time_derivative=probe.time_deriv,
            distinct_candidates=len(probe.candidates),
            converged_starts=probe.converged_starts,
            warnings=list(probe.warnings),
        )
        if config.tau is not None:
            run.metrics["dpp_residual"] = dpp_residual(config.time, config.tau, m, run.model, run.solver, run.cache)
        shift = np.asarray(parse_vector(config.translation, config.dim))
        run.metrics["semiconcavity_gap"] = semiconcavity_gap(config.time, m, shift, run.model, run.solver, run.cache)

    parser.set_defaults(handler=value_command)
