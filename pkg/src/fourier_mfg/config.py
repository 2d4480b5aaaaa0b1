"""Configuration for Fourier MFG.

Two layers:

* ``Settings`` - process-level knobs read from ``FOURIER_MFG_*`` environment variables.
* ``RunConfig`` - one experiment, read from a ``key = value`` text file plus ``--set`` overrides.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from fourier_mfg.exceptions import ConfigError
from fourier_mfg.models.enums import DerivativeSource, FieldKind, HamiltonianKind


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(env_prefix="FOURIER_MFG_")

    # Parallelism
    max_workers: int = Field(default=4, ge=1)

    # Solve cache
    solve_cache_max_entries: int = Field(default=256, ge=1)

    # Positivity certification (points per axis)
    positivity_resolution_cap_1d: int = 2**14
    positivity_resolution_cap_2d: int = 2**11

    # Outputs
    output_root: str = "out"

    # Logging
    log_level: str = "INFO"
    log_format: Literal["text", "json"] = "text"


settings = Settings()


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


class SolverConfig(BaseModel):
    """Numerical parameters shared by the MFG, MFCP and checker services."""

    model_config = ConfigDict(frozen=True)

    resolution: int = 64
    steps: int = 200
    damping: float = Field(default=0.5, gt=0.0, le=1.0)
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=100, ge=1)
    clip_factor: float = Field(default=2.0, gt=0.0)
    blowup_bound: float = Field(default=1e6, gt=0.0)
    negativity_tolerance: float = Field(default=1e-8, ge=0.0)
    n_starts: int = Field(default=8, ge=1)
    start_amplitude: float = Field(default=0.5, ge=0.0)
    dedupe_distance: float = Field(default=1e-4, gt=0.0)
    tie_tolerance: float = Field(default=1e-9, ge=0.0)
    fd_step: float = Field(default=1e-3, gt=0.0)
    fd_halvings: int = Field(default=6, ge=0)
    time_probe_fraction: float = Field(default=0.01, gt=0.0, lt=0.5)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: int) -> int:
        if not _is_power_of_two(value) or value < 8:
            raise ValueError("resolution must be a power of two >= 8")
        return value

    def fingerprint(self) -> str:
        """Stable text identity used in cache keys."""
        return self.model_dump_json()


class RunConfig(BaseModel):
    """Fully resolved parameters of one CLI run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Model
    dim: int = Field(default=1, ge=1, le=2)
    order: int = Field(default=4, ge=1)
    horizon: float = Field(default=0.5, gt=0.0)
    hamiltonian: HamiltonianKind = HamiltonianKind.QUADRATIC
    hamiltonian_tilt: float = 0.0
    coupling_kernel: str = "1:0.25"
    terminal_kernel: str = "1:0.25"

    # Probe point
    initial_measure: str = ""
    time: float = Field(default=0.0, ge=0.0)
    tau: float | None = None
    translation: str = "0.05"
    mode_index: str = "1"

    # Solver
    resolution: int = 64
    steps: int = Field(default=200, ge=1)
    damping: float = Field(default=0.5, gt=0.0, le=1.0)
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=100, ge=1)
    clip_factor: float = Field(default=2.0, gt=0.0)
    blowup_bound: float = Field(default=1e6, gt=0.0)
    negativity_tolerance: float = Field(default=1e-8, ge=0.0)

    # Value function
    n_starts: int = Field(default=8, ge=1)
    start_amplitude: float = Field(default=0.5, ge=0.0)
    dedupe_distance: float = Field(default=1e-4, gt=0.0)
    tie_tolerance: float = Field(default=1e-9, ge=0.0)
    fd_step: float = Field(default=1e-3, gt=0.0)
    fd_halvings: int = Field(default=6, ge=0)
    time_probe_fraction: float = Field(default=0.01, gt=0.0, lt=0.5)

    # Checker
    bound_c: float = Field(default=4.0, gt=0.0)
    derivative_source: DerivativeSource = DerivativeSource.SUPERJET

    # Mollification and one-sided Lipschitz test
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    mollifier_radius: float | None = Field(default=None, gt=0.0)
    n_mc: int = Field(default=256, ge=2)
    field: FieldKind = FieldKind.LINEARIZED
    lipschitz_constant: float = Field(default=1.0, gt=0.0)
    lipschitz_matrix: str = "1"
    lipschitz_direction: str = "1:1"

    # Sampler
    gamma_p: float = Field(default=5.0, ge=5.0)
    n_samples: int = Field(default=1000, ge=1)
    event_order: int = Field(default=2, ge=1)

    # Characteristics
    flow_horizon: float = Field(default=0.2, gt=0.0)
    flow_steps: int = Field(default=100, ge=1)
    lattice_points: int = Field(default=0, ge=0)

    # Acceptance battery
    suite_trials: int = Field(default=20, ge=1)
    semiconcavity_bound: float = Field(default=1.0, gt=0.0)

    # Run
    seed: int = Field(default=0, ge=0, lt=2**64)
    name: str | None = None

    @field_validator("tau", "mollifier_radius", "name", mode="before")
    @classmethod
    def _empty_is_none(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "none"):
            return None
        return value

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: int) -> int:
        if not _is_power_of_two(value) or value < 8:
            raise ValueError("resolution must be a power of two >= 8")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> RunConfig:
        if self.resolution < 2 * self.order:
            raise ValueError(f"resolution {self.resolution} is below the Nyquist bound 2N={2 * self.order}")
        if self.time > self.horizon:
            raise ValueError("time must not exceed horizon")
        if self.tau is not None and not self.time <= self.tau <= self.horizon:
            raise ValueError("tau must satisfy time <= tau <= horizon")
        if self.event_order > self.order:
            raise ValueError("event_order must not exceed order")
        return self

    def solver(self) -> SolverConfig:
        """Numerical parameters for the service layer."""
        return SolverConfig(**{name: getattr(self, name) for name in SolverConfig.model_fields})


def parse_index(text: str, dim: int) -> tuple[int, ...]:
    """Parse ``"1"`` or ``"1,0"`` into an integer multi-index of length ``dim``."""
    try:
        index = tuple(int(part) for part in text.split(","))
    except ValueError as e:
        raise ConfigError(f"Invalid multi-index '{text}'") from e
    if len(index) != dim:
        raise ConfigError(f"Multi-index '{text}' has {len(index)} components, expected {dim}")
    return index


def parse_index_values(text: str, dim: int) -> dict[tuple[int, ...], complex]:
    """Parse ``"k1[,k2]:re[ im]; ..."`` coefficient lists.

    Example: ``"1:0.25; 2:0.1 0.05"`` in d=1 gives ``{(1,): 0.25, (2,): 0.1+0.05j}``.
    """
    values: dict[tuple[int, ...], complex] = {}
    for entry in text.split(";"):
        entry = entry.strip()
        if not entry:
            continue
        if ":" not in entry:
            raise ConfigError(f"Coefficient entry '{entry}' must look like 'k:re [im]'")
        key, _, number = entry.partition(":")
        parts = number.split()
        if len(parts) not in (1, 2):
            raise ConfigError(f"Coefficient entry '{entry}' must carry one or two numbers")
        try:
            real = float(parts[0])
            imag = float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError as e:
            raise ConfigError(f"Invalid number in coefficient entry '{entry}'") from e
        values[parse_index(key.strip(), dim)] = complex(real, imag)
    return values


def parse_vector(text: str, dim: int) -> tuple[float, ...]:
    """Parse a comma-separated real vector; a single number is broadcast."""
    try:
        parts = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"Invalid vector '{text}'") from e
    if len(parts) == 1:
        parts = parts * dim
    if len(parts) != dim:
        raise ConfigError(f"Vector '{text}' has {len(parts)} components, expected {dim}")
    return tuple(parts)


def parse_matrix(text: str, dim: int) -> np.ndarray:
    """Parse ``"a"`` (a times the identity) or rows ``"a,b; c,d"`` into a d x d matrix."""
    rows = [row for row in text.split(";") if row.strip()]
    try:
        values = [[float(part) for part in row.split(",")] for row in rows]
    except ValueError as e:
        raise ConfigError(f"Invalid matrix '{text}'") from e
    if len(values) == 1 and len(values[0]) == 1:
        return values[0][0] * np.eye(dim)
    if len(values) != dim or any(len(row) != dim for row in values):
        raise ConfigError(f"Matrix '{text}' must have {dim} rows of {dim} entries")
    return np.array(values, dtype=np.float64)


def _read_pairs(lines: list[str], origin: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def load_run_config(
    path: Path | None = None,
    overrides: list[str] | None = None,
    seed: int | None = None,
) -> RunConfig:
    """Resolve a run configuration from file, ``--set`` overrides and ``--seed``.

    Raises:
        ConfigError: malformed file or override.
        pydantic.ValidationError: values out of range or unknown keys.
    """
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(_read_pairs(path.read_text(encoding="utf-8").splitlines(), str(path)))
    if overrides:
        raw.update(_read_pairs(list(overrides), "--set"))
    if seed is not None:
        raw["seed"] = str(seed)
    return RunConfig.model_validate(raw)


def dump_run_config(config: RunConfig) -> str:
    """Render a config in the ``key = value`` format accepted by ``load_run_config``."""
    lines = ["# resolved fourier-mfg run configuration"]
    for name in RunConfig.model_fields:
        value = getattr(config, name)
        if value is None:
            text = ""
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"
