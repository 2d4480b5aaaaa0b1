"""Text and CSV formats for measures, solutions, probes, flows and reports.

Floats are written with ``repr`` so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from fourier_mfg.exceptions import ConfigError
from fourier_mfg.services.characteristics import CharFlow, PushforwardBound, TruncationReport
from fourier_mfg.services.mfcp import ValueProbe
from fourier_mfg.services.mfg_solver import MfgSolution
from fourier_mfg.services.mollification import MollifiedDerivative, MollifiedValue
from fourier_mfg.services.sampler import EventFrequencies
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure

logger = logging.getLogger(__name__)


def _number(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def _label(k: Iterable[int]) -> str:
    return "_".join(str(int(c)) for c in k)


def format_measure(m: FourierMeasure) -> str:
    """``dim N`` header, then ``k_1 .. k_d re im`` per k in F_N^+."""
    lines = [f"{m.dim} {m.order}"]
    for k, c in zip(m.index_set.positive, m.coeffs, strict=True):
        lines.append(" ".join([*(str(int(v)) for v in k), repr(float(c.real)), repr(float(c.imag))]))
    return "\n".join(lines) + "\n"


def parse_measure(text: str) -> FourierMeasure:
    """Inverse of ``format_measure``; indices may appear in any order and missing ones are zero.

    Raises:
        ConfigError: malformed header or coefficient line.
    """
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise ConfigError("empty measure block")
    try:
        dim, order = (int(part) for part in lines[0].split())
    except ValueError as e:
        raise ConfigError(f"measure header must be 'dim N', got '{lines[0]}'") from e
    values: dict[tuple[int, ...], complex] = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != dim + 2:
            raise ConfigError(f"coefficient line '{line}' needs {dim} indices and two numbers")
        try:
            key = tuple(int(p) for p in parts[:dim])
            values[key] = complex(float(parts[dim]), float(parts[dim + 1]))
        except ValueError as e:
            raise ConfigError(f"invalid coefficient line '{line}'") from e
    return FourierMeasure.from_mapping(dim, order, values)


def write_measures(path: Path, measures: Sequence[FourierMeasure]) -> Path:
    """One block per measure, separated by blank lines."""
    path.write_text("\n".join(format_measure(m) for m in measures), encoding="utf-8")
    return path


def read_measures(path: Path) -> list[FourierMeasure]:
    blocks = path.read_text(encoding="utf-8").split("\n\n")
    return [parse_measure(block) for block in blocks if block.strip()]


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_number(v) for v in row])
    logger.debug("Wrote %s", path)
    return path


def write_density_csv(path: Path, density: DensityGrid) -> Path:
    """Grid samples, one row per first-axis index (d = 2) or one row per point (d = 1)."""
    values = density.values
    if density.dim == 1:
        return _write_rows(path, ["x", "density"], ((i / values.shape[0], v) for i, v in enumerate(values)))
    header = ["row", *(str(j) for j in range(values.shape[1]))]
    return _write_rows(path, header, ([i, *row] for i, row in enumerate(values)))


def write_solution_csv(path: Path, solution: MfgSolution) -> Path:
    """Per node a density row and a value row over the flattened grid, then a summary row."""
    size = int(np.prod(solution.grid.shape))
    header = ["step", "time", "field", *(f"x{j}" for j in range(size))]
    densities = solution.densities.reshape(solution.time_grid.steps + 1, size)
    values = solution.value.reshape(solution.time_grid.steps + 1, size)

    def rows() -> Iterable[list[Any]]:
        for n, t in enumerate(solution.time_grid.times):
            yield [n, float(t), "density", *densities[n]]
            yield [n, float(t), "value", *values[n]]
        yield ["summary", "", "cost", solution.cost]
        yield ["summary", "", "residual", solution.residual]
        yield ["summary", "", "iterations", solution.iterations]

    return _write_rows(path, header, rows())


def write_probe_csv(path: Path, probe: ValueProbe) -> Path:
    """Value, per-k derivative real/imag and the cost of every candidate equilibrium."""

    def rows() -> Iterable[list[Any]]:
        yield ["value", "", probe.value, ""]
        if probe.time_deriv is not None:
            yield ["time_derivative", "", probe.time_deriv, ""]
        for k, d in zip(probe.index_set.positive, probe.coeff_derivs, strict=True):
            yield ["derivative", _label(k), float(d.real), float(d.imag)]
        for candidate in probe.candidates:
            yield ["candidate_cost", candidate.start, candidate.cost, ""]

    return _write_rows(path, ["quantity", "key", "real", "imag"], rows())


def _mode_header(index_set: MultiIndexSet) -> list[str]:
    header = []
    for k in index_set.positive:
        header += [f"re_{_label(k)}", f"im_{_label(k)}"]
    return header


def write_flow_csv(path: Path, flow: CharFlow) -> Path:
    """time, per-mode re/im, log-Jacobian."""
    header = ["time", *_mode_header(flow.index_set), "log_jacobian"]

    def rows() -> Iterable[list[Any]]:
        for n, t in enumerate(flow.time_grid.times):
            modes = np.column_stack([flow.modes[n].real, flow.modes[n].imag]).ravel()
            log_j = "" if flow.jacobian_log is None else float(flow.jacobian_log[n])
            yield [float(t), *modes, log_j]

    return _write_rows(path, header, rows())


def write_truncation_csv(path: Path, report: TruncationReport) -> Path:
    rows = ((float(t), "" if np.isnan(e) else float(e)) for t, e in zip(report.times, report.eta, strict=True))
    return _write_rows(path, ["time", "eta"], rows)


def write_frequencies_csv(path: Path, rows: Sequence[tuple[int, EventFrequencies]]) -> Path:
    """One row per base order N0."""
    return _write_rows(
        path,
        ["base_order", "freq_a", "freq_b", "a0", "count"],
        ([n0, f.freq_a, f.freq_b, f.a0, f.count] for n0, f in rows),
    )


def _flatten(prefix: str, value: Any, out: dict[str, Any]) -> None:
    if isinstance(value, dict):
        for key, inner in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), inner, out)
    elif isinstance(value, list | tuple):
        out[prefix] = " ".join(_number(v) for v in value)
    else:
        out[prefix] = value


def report_row(report: BaseModel, exclude: set[str] | None = None) -> dict[str, Any]:
    """Flat column -> value mapping of a report; nested terms become dotted columns."""
    out: dict[str, Any] = {}
    _flatten("", report.model_dump(mode="json", exclude=exclude), out)
    return out


def write_report_csv(path: Path, reports: Sequence[BaseModel], exclude: set[str] | None = None) -> Path:
    """One row per report with named columns for every breakdown term.

    Fields named in ``exclude`` are left out, e.g. wall-clock timings that would
    make reruns differ.
    """
    if not reports:
        raise ConfigError("no reports to write")
    flat = [report_row(r, exclude) for r in reports]
    header = list(flat[0])
    for row in flat[1:]:
        header += [key for key in row if key not in header]
    return _write_rows(path, header, ([row.get(key, "") for key in header] for row in flat))


def write_mollification_csv(
    path: Path, value: MollifiedValue, derivative: MollifiedDerivative, index_set: MultiIndexSet
) -> Path:
    """Mollified value, then d_{m^k} per mode, each with its Monte-Carlo standard error."""

    def rows() -> Iterable[list[Any]]:
        yield ["value", "", value.value, "", value.standard_error, ""]
        for k, d, e in zip(index_set.positive, derivative.coefficients, derivative.standard_error, strict=True):
            yield ["derivative", _label(k), float(d.real), float(d.imag), float(e.real), float(e.imag)]

    return _write_rows(path, ["quantity", "key", "real", "imag", "se_real", "se_imag"], rows())


def write_pushforward_csv(path: Path, times: np.ndarray, bound: PushforwardBound) -> Path:
    """Density bound of the pushed-forward perturbation law at every node."""
    return _write_rows(path, ["time", "density_bound"], zip(times.tolist(), bound.per_time.tolist(), strict=True))
