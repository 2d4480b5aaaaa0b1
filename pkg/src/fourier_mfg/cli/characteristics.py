"""Integrate the mollified McKean-Vlasov characteristics."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.services.characteristics import build_drift, integrate_flow, pushforward_density_bound
from fourier_mfg.services.mfg_solver import TimeGrid
from fourier_mfg.services.serialization import write_flow_csv, write_pushforward_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the characteristics subcommand."""
    parser = subparsers.add_parser(
        "characteristics",
        help="integrate the Fourier-mode characteristics with the log-Jacobian",
        description=(
            "Builds the drift from the configured field at (time, initial_measure), integrates the flow over "
            "[0, flow_horizon] into flow.csv, and with lattice_points > 0 bounds the pushforward density."
        ),
    )

    @handle_command_errors("characteristics")
    def characteristics_command(run: RunContext) -> None:
        config = run.config
        m0 = run.initial_measure
        drift = build_drift(
            run.field, run.model, config.epsilon, radius=config.mollifier_radius, n_mc=config.n_mc, seed=config.seed
        )
        grid = TimeGrid(0.0, config.flow_horizon, config.flow_steps)
        flow = integrate_flow(m0, drift, grid, bound_c=config.bound_c)
        write_flow_csv(run.path("flow.csv"), flow)

        lows, gradients = flow.density_bounds
        assert flow.jacobian_log is not None
        run.metrics.update(
            field=config.field.value,
            min_density=float(lows.min()),
            max_gradient_bound=float(gradients.max()),
            c_prime=max(1.0 / float(lows.min()), float(gradients.max())),
            final_log_jacobian=float(flow.jacobian_log[-1]),
        )
        if config.lattice_points > 0:
            bound = pushforward_density_bound(m0, drift, grid, config.bound_c, config.lattice_points)
            write_pushforward_csv(run.path("pushforward.csv"), grid.times, bound)
            run.metrics.update(pushforward_bound=bound.bound, lattice_size=bound.lattice_size)
        logger.info("Flow stayed in O_N with c' = %.4f", run.metrics["c_prime"])

    parser.set_defaults(handler=characteristics_command)
