"""Draw measures from the truncated Gaussian law on O_N."""

from __future__ import annotations

import argparse
import logging

from fourier_mfg.cli.error_handling import handle_command_errors
from fourier_mfg.cli.run_context import RunContext
from fourier_mfg.services.sampler import GammaSpec, event_frequencies, sample_gamma_n
from fourier_mfg.services.serialization import write_frequencies_csv, write_measures

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    """Register the sample subcommand."""
    parser = subparsers.add_parser(
        "sample",
        help="rejection-sample measures and the concentration event frequencies",
        description="Writes samples.txt (one measure block per sample) and frequencies.csv for N0 = 1..event_order.",
    )

    @handle_command_errors("sample")
    def sample_command(run: RunContext) -> None:
        config = run.config
        spec = GammaSpec(config.order, config.dim, config.gamma_p)
        samples = sample_gamma_n(spec, config.n_samples, config.seed)
        write_measures(run.path("samples.txt"), samples.measures)
        rows = [(n0, event_frequencies(samples.measures, n0)) for n0 in range(1, config.event_order + 1)]
        write_frequencies_csv(run.path("frequencies.csv"), rows)
        run.metrics.update(
            acceptance_rate=samples.acceptance_rate,
            proposals=samples.proposals,
            freq_a={str(n0): f.freq_a for n0, f in rows},
            freq_b={str(n0): f.freq_b for n0, f in rows},
        )

    parser.set_defaults(handler=sample_command)
