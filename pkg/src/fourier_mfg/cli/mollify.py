"""Mollify the distance-to-uniform functional at the configured measure."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.services.mollification import MeasureFunctional, mollified_derivative, mollify
from fourier_mfg.services.serialization import write_mollification_csv
from fourier_mfg.spectral.distances import dist_tv, dist_w1_1d
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure

logger = logging.getLogger(__name__)


def distance_to_uniform(dim: int) -> MeasureFunctional:
    """W1 to the uniform measure on the circle, total variation on the 2-torus."""
    distance = dist_w1_1d if dim == 1 else dist_tv

    def phi(m: FourierMeasure) -> float:
        return distance(m, FourierMeasure.uniform(m.dim, m.order))

    return phi


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the mollify subcommand."""
    parser = subparsers.add_parser(
        "mollify",
        help="Monte-Carlo mollification and its coefficient derivatives",
        description="Mollifies the distance to the uniform measure at (order, epsilon, mollifier_radius, n_mc).",
    )

    @handle_command_errors("mollify")
    def mollify_command(run: RunContext) -> None:
        config = run.config
        phi = distance_to_uniform(config.dim)
        m = run.initial_measure
        options = dict(radius=config.mollifier_radius, n_mc=config.n_mc, seed=config.seed)
        smoothed = mollify(phi, m, config.order, config.epsilon, **options)
        derivative = mollified_derivative(phi, m, config.order, config.epsilon, **options)
        index_set = MultiIndexSet(config.dim, config.order)
        write_mollification_csv(run.path("mollify.csv"), smoothed, derivative, index_set)
        run.metrics.update(
            value=smoothed.value,
            standard_error=smoothed.standard_error,
            unmollified=phi(m),
            radius=config.mollifier_radius or index_set.regularization_threshold(config.epsilon),
        )

    parser.set_defaults(handler=mollify_command)
