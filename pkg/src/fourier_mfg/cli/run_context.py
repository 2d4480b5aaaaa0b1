"""Per-run state shared by the subcommands: resolved config, output directory and summary."""

from __future__ import annotations

import argparse
import logging
from datetime import UTC, datetime
from functools import cached_property
from pathlib import Path
from typing import Any

from fourier_mfg.config import RunConfig, SolverConfig, dump_run_config, load_run_config, settings
from fourier_mfg.logging_config import bind_run
from fourier_mfg.models.enums import FieldKind
from fourier_mfg.models.reports import RunSummary
from fourier_mfg.services.fields import CoefficientField, make_field
from fourier_mfg.services.mfcp import value
from fourier_mfg.services.model import ModelSpec, initial_measure
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = "config.resolved.txt"
SUMMARY = "summary.json"


class RunContext:
    """One CLI run: everything a subcommand reads and the directory it writes to."""

    def __init__(
        self, subcommand: str, config: RunConfig, directory: Path, args: argparse.Namespace | None = None
    ):
        self.subcommand = subcommand
        self.config = config
        self.directory = directory
        self.args = args if args is not None else argparse.Namespace()
        self.outputs: list[str] = []
        self.metrics: dict[str, Any] = {}
        self.cache = SolveCache(settings.solve_cache_max_entries)

    @cached_property
    def model(self) -> ModelSpec:
        return ModelSpec.from_run_config(self.config)

    @cached_property
    def solver(self) -> SolverConfig:
        return self.config.solver()

    @cached_property
    def initial_measure(self) -> FourierMeasure:
        return initial_measure(self.config)

    @cached_property
    def field(self) -> CoefficientField:
        """The configured coefficient field; the linearized one expands around V(time, initial_measure)."""
        config = self.config
        probe = None
        if config.field is FieldKind.LINEARIZED:
            probe = value(config.time, self.initial_measure, self.model, self.solver, False, self.cache)
        index_set = MultiIndexSet(config.dim, config.order)
        return make_field(config.field, self.model, index_set, self.solver, config.time, probe, self.cache)

    def path(self, name: str) -> Path:
        """Path of an output file, recorded in the summary."""
        if name not in self.outputs:
            self.outputs.append(name)
        return self.directory / name

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        return target

    def finish(self, status: str) -> Path:
        summary = RunSummary(
            subcommand=self.subcommand,
            name=self.directory.name,
            status=status,
            outputs=sorted(self.outputs),
            metrics=self.metrics,
        )
        target = self.directory / SUMMARY
        target.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("Run %s/%s finished [%s] in %s", self.subcommand, self.directory.name, status, self.directory)
        return target


def open_run(args: argparse.Namespace, subcommand: str) -> RunContext:
    """Resolve the config, create ``<out>/<subcommand>/<name or timestamp>/`` and write the resolved config.

    Raises:
        ConfigError: malformed config file or override.
        pydantic.ValidationError: values out of range.
        FileNotFoundError: missing config file.
    """
    path = Path(args.config) if args.config else None
    config = load_run_config(path, args.set, args.seed)
    root = Path(args.out) if args.out else Path(settings.output_root)
    name = config.name or datetime.now(UTC).strftime("%Y%m%dT%H%M%S%f")
    directory = root / subcommand / name
    directory.mkdir(parents=True, exist_ok=True)
    bind_run(subcommand, name)
    run = RunContext(subcommand, config, directory, args)
    run.write_text(RESOLVED_CONFIG, dump_run_config(config))
    logger.info("Starting %s in %s (seed %d)", subcommand, directory, config.seed)
    return run
