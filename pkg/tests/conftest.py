"""Pytest configuration and shared fixtures for fourier-mfg tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from fourier_mfg.config import RunConfig, SolverConfig
from fourier_mfg.services.model import ModelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.measure import FourierMeasure


@pytest.fixture
def small_solver() -> SolverConfig:
    """Coarse solver settings that keep one MFG solve well under a second."""
    return SolverConfig(resolution=32, steps=40, n_starts=3, max_iterations=200, tolerance=1e-9)


@pytest.fixture
def default_model() -> ModelSpec:
    """H = |p|^2/2 with cosine couplings of amplitude 0.5 in d = 1."""
    return ModelSpec.default(dim=1)


@pytest.fixture
def free_model() -> ModelSpec:
    """f = g = 0, H = |p|^2/2: the value function vanishes."""
    return ModelSpec.free(dim=1)


@pytest.fixture
def smooth_measure() -> FourierMeasure:
    """A strictly positive order-3 measure in d = 1."""
    return FourierMeasure.from_mapping(1, 3, {(1,): 0.12 + 0.05j, (2,): 0.04})


@pytest.fixture
def smooth_measure_2d() -> FourierMeasure:
    """A strictly positive order-2 measure in d = 2."""
    return FourierMeasure.from_mapping(2, 2, {(1, 0): 0.08, (0, 1): 0.05j, (1, -1): 0.03})


@pytest.fixture
def solve_cache() -> SolveCache:
    """Fresh solve cache per test."""
    return SolveCache(max_entries=64)


@pytest.fixture
def small_run_config() -> RunConfig:
    """Scaled-down run configuration shared by CLI and acceptance tests."""
    return RunConfig(
        order=3,
        resolution=32,
        steps=40,
        n_starts=3,
        n_mc=32,
        n_samples=200,
        flow_steps=20,
        suite_trials=3,
        initial_measure="1:0.1 0.05; 2:0.03",
        name="small",
    )


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Write a small config file and return its path."""
    path = tmp_path / "run.txt"
    path.write_text(
        "\n".join(
            [
                "# small d = 1 run",
                "dim = 1",
                "order = 3",
                "resolution = 32",
                "steps = 40",
                "n_starts = 3",
                "n_mc = 32",
                "n_samples = 100",
                "flow_steps = 20",
                "initial_measure = 1:0.1 0.05; 2:0.03",
                "name = small",
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return path
