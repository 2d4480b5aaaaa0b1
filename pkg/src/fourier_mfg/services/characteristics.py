"""Fourier-coefficient characteristics of the mollified McKean-Vlasov Fokker-Planck equation.

The flow solves d_t m - div(DH(m)(x) (m * f_N)(x)) - Lap(m)/2 = 0 mode by mode:

    d/dt m^k = -2 pi^2 |k|^2 m^k - i 2 pi k . int DH(m) (m * f_N) e_k dx,

where DH averages d_pH(x, lambda P1 + (1 - lambda) P2) over lambda in [0, 1] and
P1, P2 are spatial gradients of two mollified coefficient fields. The linear
part is integrated exactly (Lawson RK4); the log-Jacobian of the flow map is
co-integrated from the trace of the variational system.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.special import roots_legendre

from fourier_mfg.config import settings
from fourier_mfg.exceptions import ConfigError, DimensionMismatchError, FlowExitError, PreconditionError
from fourier_mfg.models.enums import FieldKind, MembershipStatus
from fourier_mfg.services.fields import CoefficientField, coefficient_gradient
from fourier_mfg.services.mfg_solver import TimeGrid, solve_fokker_planck
from fourier_mfg.services.model import ModelSpec
from fourier_mfg.services.mollification import BumpMollifier, check_radius, perturbation_stream
from fourier_mfg.spectral.distances import dist_w1_1d
from fourier_mfg.spectral.fejer import fejer_multipliers
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure, batch_densities
from fourier_mfg.spectral.positivity import is_in_O_N, min_density
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid, next_power_of_two

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 5
MAX_LATTICE_SIZE = 4096


class DriftState(NamedTuple):
    """Everything the mode equation and its variational system need at one measure."""

    velocity: np.ndarray
    density: np.ndarray
    gradients: tuple[np.ndarray, np.ndarray]


class MollifiedDrift:
    """DH(m)(x) built from two coefficient fields, mollified at order N.

    The mollifier draws are fixed at construction, so the drift is a
    deterministic function of m and the same draws serve every mode.
    """

    def __init__(
        self,
        first: CoefficientField,
        model: ModelSpec,
        epsilon: float,
        second: CoefficientField | None = None,
        radius: float | None = None,
        n_mc: int = 64,
        seed: int = 0,
        resolution: int | None = None,
    ):
        self.index_set: MultiIndexSet = first.index_set
        if second is not None and second.index_set != self.index_set:
            raise DimensionMismatchError("both fields must share an index set", self.index_set, second.index_set)
        self.first = first
        self.second = second if second is not None else first
        self.model = model
        self.epsilon = epsilon
        self.radius = check_radius(self.index_set, epsilon, radius)
        self.samples = perturbation_stream(BumpMollifier(self.radius), self.index_set.size, n_mc, seed)
        self.fejer = fejer_multipliers(self.index_set)
        size = resolution or max(32, next_power_of_two(4 * self.index_set.order))
        self.grid = PeriodicGrid(self.index_set.dim, size)
        nodes, weights = roots_legendre(QUADRATURE_POINTS)
        self.lambdas = 0.5 * (nodes + 1.0)
        self.weights = 0.5 * weights

    @property
    def single_field(self) -> bool:
        return self.second is self.first

    def _arguments(self, coeffs: np.ndarray) -> np.ndarray:
        return self.fejer * (1.0 - self.epsilon) * (coeffs + self.samples)

    def derivatives(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient derivatives (1 - eps) f^k E[Z^k(m'(r))] of both mollified fields."""
        arguments = self._arguments(coeffs)
        scale = (1.0 - self.epsilon) * self.fejer
        first = scale * np.mean(self.first.evaluate(arguments), axis=0)
        if self.single_field:
            return first, first
        return first, scale * np.mean(self.second.evaluate(arguments), axis=0)

    def _field_jacobian(self, field: CoefficientField, arguments: np.ndarray) -> np.ndarray:
        if field.kind is FieldKind.VALUE:
            return np.mean([field.jacobian(row) for row in arguments], axis=0)
        return field.jacobian(arguments[0])

    def derivative_jacobians(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """d D^j / d(Re m^k, Im m^k) = (1 - eps)^2 f^j f^k E[dZ^j/d(Re, Im) m'^k]."""
        arguments = self._arguments(coeffs)
        outer = (1.0 - self.epsilon) ** 2 * np.outer(self.fejer, self.fejer)[:, :, np.newaxis]
        first = outer * self._field_jacobian(self.first, arguments)
        if self.single_field:
            return first, first
        return first, outer * self._field_jacobian(self.second, arguments)

    def potential_gradients(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """P1, P2: spatial gradients of the two mollified flat derivatives, each (d, M, ..., M)."""
        d1, d2 = self.derivatives(coeffs)
        p1 = coefficient_gradient(d1, self.index_set, self.grid)
        return p1, p1 if self.single_field else coefficient_gradient(d2, self.index_set, self.grid)

    def smoothed_density(self, coeffs: np.ndarray) -> np.ndarray:
        """(m * f_N) on the grid."""
        return batch_densities(self.fejer * coeffs, self.index_set, self.grid.resolution)[0]

    def velocity(self, coeffs: np.ndarray, use_quadrature: bool | None = None) -> np.ndarray:
        """DH(m)(x) on the grid, shape (d, M, ..., M).

        With a single field the lambda integrand is constant and one evaluation
        replaces the quadrature unless ``use_quadrature`` forces it.
        """
        p1, p2 = self.potential_gradients(coeffs)
        return self._velocity(p1, p2, use_quadrature)

    def _velocity(self, p1: np.ndarray, p2: np.ndarray, use_quadrature: bool | None = None) -> np.ndarray:
        hamiltonian, points = self.model.hamiltonian, self.grid.points
        quadrature = not self.single_field if use_quadrature is None else use_quadrature
        if not quadrature:
            return hamiltonian.grad_p(points, p1)
        return sum(
            w * hamiltonian.grad_p(points, lam * p1 + (1.0 - lam) * p2)
            for lam, w in zip(self.lambdas, self.weights, strict=True)
        )

    def __call__(self, m: FourierMeasure) -> np.ndarray:
        """DH(m)(x) on the drift grid; m is read at the drift's order."""
        return self.velocity(m.with_order(self.index_set.order).coeffs)

    def state(self, coeffs: np.ndarray) -> DriftState:
        p1, p2 = self.potential_gradients(coeffs)
        return DriftState(self._velocity(p1, p2), self.smoothed_density(coeffs), (p1, p2))

    def velocity_variations(self, coeffs: np.ndarray, state: DriftState) -> np.ndarray:
        """d DH / d(Re m^k, Im m^k), shape (|F_N^+|, 2, d, M, ..., M)."""
        j1, j2 = self.derivative_jacobians(coeffs)
        # j[:, k, part] holds dD^j/d(part m^k); reorder to (k, part, j) for the gradient batch
        g1 = coefficient_gradient(np.transpose(j1, (1, 2, 0)), self.index_set, self.grid)
        g2 = g1 if self.single_field else coefficient_gradient(np.transpose(j2, (1, 2, 0)), self.index_set, self.grid)
        p1, p2 = state.gradients
        points = self.grid.points
        hamiltonian = self.model.hamiltonian
        nodes = [(1.0, 1.0)] if self.single_field else list(zip(self.lambdas, self.weights, strict=True))
        out = np.zeros(g1.shape[1:3] + g1.shape[:1] + g1.shape[3:])
        for lam, w in nodes:
            hessian = hamiltonian.hess_p(points, lam * p1 + (1.0 - lam) * p2)
            direction = lam * g1 + (1.0 - lam) * g2
            out += w * np.einsum("ab...,bkp...->kpa...", hessian, direction)
        return out


def build_drift(
    first: CoefficientField,
    model: ModelSpec,
    epsilon: float,
    second: CoefficientField | None = None,
    radius: float | None = None,
    n_mc: int = 64,
    seed: int = 0,
    resolution: int | None = None,
) -> MollifiedDrift:
    """Drift from one or two coefficient fields; the second defaults to the first.

    Fields are frozen at the time they were built for, so the drift does not
    depend on t along the flow.

    Raises:
        MollifierRadiusError: radius above delta_{N,eps}.
    """
    drift = MollifiedDrift(first, model, epsilon, second, radius, n_mc, seed, resolution)
    logger.info(
        "Drift at order %d from %s / %s fields (radius %.3e, %d draws)",
        drift.index_set.order,
        drift.first.kind,
        drift.second.kind,
        drift.radius,
        drift.samples.shape[0],
    )
    return drift


@dataclass(frozen=True, eq=False)
class CharFlow:
    """Modes m_t^k over F_N^+ at every node, with the log-Jacobian of the flow map."""

    time_grid: TimeGrid
    index_set: MultiIndexSet
    modes: np.ndarray
    jacobian_log: np.ndarray | None
    drift: MollifiedDrift

    def measure(self, n: int) -> FourierMeasure:
        return FourierMeasure(self.index_set, self.modes[n])

    @cached_property
    def density_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Certified minimum density and gradient bound at every node."""
        resolution = max(64, next_power_of_two(4 * self.index_set.order))
        lows = np.array([min_density(self.measure(n), resolution).certified_lower_bound for n in range(len(self.modes))])
        gradients = np.array([self.measure(n).gradient_bound() for n in range(len(self.modes))])
        return lows, gradients


def _restriction(flow_set: MultiIndexSet, drift_set: MultiIndexSet) -> tuple[np.ndarray, np.ndarray]:
    if flow_set.dim != drift_set.dim or flow_set.order < drift_set.order:
        raise ConfigError(f"flow order {flow_set.order} must be at least the drift order {drift_set.order}")
    mine, theirs = drift_set.embedding_into(flow_set)
    order = np.argsort(mine)
    return mine[order], theirs[order]


class _ModeSystem:
    """Nonlinear part of the mode equation and the nonlinear part of its trace."""

    def __init__(self, drift: MollifiedDrift, index_set: MultiIndexSet):
        self.drift = drift
        self.index_set = index_set
        self.drift_positions, self.flow_positions = _restriction(index_set, drift.index_set)
        grid = drift.grid
        if grid.resolution <= 2 * index_set.order:
            raise ConfigError(f"drift grid {grid.resolution} cannot resolve flow order {index_set.order}")
        self.plus, _ = index_set.fft_positions(grid.resolution)
        phases = TWO_PI * np.tensordot(drift.index_set.positive.astype(np.float64), grid.points, axes=(1, 0))
        self.cosines, self.sines = np.cos(phases), np.sin(phases)
        self.modes = index_set.positive.astype(np.float64)

    def _truncate(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros(self.drift.index_set.size, dtype=np.complex128)
        out[self.drift_positions] = coeffs[self.flow_positions]
        return out

    def _transport(self, field: np.ndarray, k: np.ndarray, plus: tuple[np.ndarray, ...]) -> np.ndarray:
        """-i 2 pi k . (coefficient of the vector field at k)."""
        spectrum = self.drift.grid.to_spectral(field)
        components = spectrum[(slice(None), *plus)]
        return -1j * TWO_PI * np.sum(k.T * components, axis=0)

    def rhs(self, coeffs: np.ndarray, with_trace: bool) -> tuple[np.ndarray, float]:
        truncated = self._truncate(coeffs)
        state = self.drift.state(truncated)
        flux = state.velocity * state.density
        transport = self._transport(flux, self.modes, self.plus)
        if not with_trace:
            return transport, 0.0
        return transport, self._trace(truncated, state)

    def _trace(self, truncated: np.ndarray, state: DriftState) -> float:
        """sum_k of d Re G^k / d Re m^k + d Im G^k / d Im m^k for the modes the drift sees."""
        drift = self.drift
        fejer = drift.fejer
        grid = drift.grid
        variations = drift.velocity_variations(truncated, state)
        total = 0.0
        for local, k in enumerate(drift.index_set.positive.astype(np.float64)):
            position = tuple(np.array([int(c) % grid.resolution]) for c in k)
            key = np.array([k])
            # frozen drift, density varying: d(m*f_N)/dRe m^k = 2 f^k cos, d/dIm m^k = 2 f^k sin
            along_re = state.velocity * (2.0 * fejer[local] * self.cosines[local]) + variations[local, 0] * state.density
            along_im = state.velocity * (2.0 * fejer[local] * self.sines[local]) + variations[local, 1] * state.density
            total += float(np.real(self._transport(along_re, key, position))[0])
            total += float(np.imag(self._transport(along_im, key, position))[0])
        return total


def integrate_flow(
    m0: FourierMeasure,
    drift: MollifiedDrift,
    time_grid: TimeGrid,
    with_jacobian: bool = True,
    bound_c: float | None = None,
    resolution: int | None = None,
) -> CharFlow:
    """Lawson RK4 on the mode system with the heat factor e^{-2 pi^2 |k|^2 dt} applied exactly.

    The flow's order may exceed the drift's; the drift only reads modes in its own F_N.

    Raises:
        PreconditionError: m0 is outside B_N(c) when ``bound_c`` is given.
        FlowExitError: m_t leaves O_N.
    """
    index_set = m0.index_set
    if bound_c is not None:
        lower, _ = min_density(m0, max(64, next_power_of_two(2 * index_set.order)))
        if lower < 1.0 / bound_c:
            raise PreconditionError("min density >= 1/c", lower, 1.0 / bound_c)
        if m0.gradient_bound() > bound_c:
            raise PreconditionError("gradient bound <= c", m0.gradient_bound(), bound_c)
    system = _ModeSystem(drift, index_set)
    positivity_resolution = resolution or max(64, next_power_of_two(4 * index_set.order))

    dt = time_grid.dt
    rate = 2.0 * np.pi**2 * index_set.norms_sq
    half = np.exp(-rate * dt / 2.0)
    full = half * half
    heat_trace = -2.0 * float(np.sum(rate))

    modes = np.empty((time_grid.steps + 1, index_set.size), dtype=np.complex128)
    log_j = np.zeros(time_grid.steps + 1) if with_jacobian else None
    modes[0] = m0.coeffs
    warned = False
    for n in range(time_grid.steps):
        c = modes[n]
        k1, t1 = system.rhs(c, with_jacobian)
        k2, t2 = system.rhs(half * c + 0.5 * dt * half * k1, with_jacobian)
        k3, t3 = system.rhs(half * c + 0.5 * dt * k2, with_jacobian)
        k4, t4 = system.rhs(full * c + dt * half * k3, with_jacobian)
        modes[n + 1] = full * c + dt / 6.0 * (full * k1 + 2.0 * half * (k2 + k3) + k4)
        if log_j is not None:
            log_j[n + 1] = log_j[n] + dt * heat_trace + dt / 6.0 * (t1 + 2.0 * t2 + 2.0 * t3 + t4)

        membership = is_in_O_N(FourierMeasure(index_set, modes[n + 1]), positivity_resolution)
        if membership.status is MembershipStatus.OUTSIDE:
            raise FlowExitError(float(time_grid.times[n + 1]), membership.margin)
        if membership.status is MembershipStatus.INCONCLUSIVE and not warned:
            logger.warning("Positivity inconclusive along the flow at t=%.4f", time_grid.times[n + 1])
            warned = True

    return CharFlow(time_grid, index_set, modes, log_j, drift)


def _real_coordinates(coeffs: np.ndarray) -> np.ndarray:
    return np.concatenate([coeffs.real, coeffs.imag])


def flow_map_log_determinant(
    m0: FourierMeasure, drift: MollifiedDrift, time_grid: TimeGrid, step: float = 1e-6
) -> float:
    """log |det| of the flow map's Jacobian in the real coordinates (Re m^k, Im m^k), by central differences."""
    size = m0.index_set.size
    jacobian = np.zeros((2 * size, 2 * size))
    for i in range(2 * size):
        shift = np.zeros(size, dtype=np.complex128)
        shift[i % size] = step if i < size else 1j * step
        forward = integrate_flow(m0.replace(m0.coeffs + shift), drift, time_grid, with_jacobian=False)
        backward = integrate_flow(m0.replace(m0.coeffs - shift), drift, time_grid, with_jacobian=False)
        jacobian[:, i] = (_real_coordinates(forward.modes[-1]) - _real_coordinates(backward.modes[-1])) / (2 * step)
    _, log_det = np.linalg.slogdet(jacobian)
    return float(log_det)


class PushforwardBound(NamedTuple):
    bound: float
    per_time: np.ndarray
    volume: float
    lattice_size: int


def perturbation_volume(index_set: MultiIndexSet, radius: float) -> float:
    """Volume of {sum_k |k| |r^k| < radius} in C^{|F_N^+|}: (2 pi)^S radius^{2S} / ((2S)! prod |k|^2)."""
    size = index_set.size
    return float((TWO_PI**size) * radius ** (2 * size) / (math.factorial(2 * size) * np.prod(index_set.norms_sq)))


def perturbation_lattice(index_set: MultiIndexSet, radius: float, points: int) -> np.ndarray:
    """Midpoint lattice of the box around {sum_k |k| |r^k| < radius}, restricted to that set."""
    size = index_set.size
    count = points ** (2 * size)
    if count > MAX_LATTICE_SIZE:
        raise ConfigError(f"lattice of {count} points is too large; lower lattice_points or the order")
    unit = -1.0 + (2.0 * np.arange(points) + 1.0) / points
    rows = []
    for combo in itertools.product(unit, repeat=2 * size):
        coords = np.asarray(combo)
        r = (coords[:size] + 1j * coords[size:]) * radius / index_set.norms
        if np.sum(index_set.norms * np.abs(r)) < radius:
            rows.append(r)
    return np.array(rows, dtype=np.complex128).reshape(-1, size)


def pushforward_density_bound(
    m0: FourierMeasure,
    drift: MollifiedDrift,
    time_grid: TimeGrid,
    bound_c: float,
    lattice_points: int = 3,
) -> PushforwardBound:
    """Largest density of the image of the uniform law on m0 + C_N(c) under the flow.

    Each lattice point carries density exp(-log J_t) / vol(C_N(c)) at its image;
    the bound is the maximum over the lattice and the time grid.
    """
    index_set = m0.index_set
    radius = 1.0 / (2.0 * bound_c)
    volume = perturbation_volume(index_set, radius)
    lattice = perturbation_lattice(index_set, radius, lattice_points)

    def run(r: np.ndarray) -> np.ndarray:
        flow = integrate_flow(m0.replace(m0.coeffs + r), drift, time_grid, with_jacobian=True)
        assert flow.jacobian_log is not None
        return flow.jacobian_log

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        logs = np.array(list(pool.map(run, lattice)))
    per_time = np.max(np.exp(-logs), axis=0) / volume
    logger.info("Pushforward density bound %.4g over %d lattice points", per_time.max(), len(lattice))
    return PushforwardBound(float(per_time.max()), per_time, volume, len(lattice))


@dataclass(frozen=True, eq=False)
class TruncationReport:
    """eta(t) = d_W1(m_t, mu_t) / (t - t0) with mu_t the F_N truncation of m_t."""

    times: np.ndarray
    eta: np.ndarray
    sup_eta: float
    positivity_time: float


def truncation_error(
    m0: FourierMeasure,
    feedback: np.ndarray,
    time_grid: TimeGrid,
    order: int,
    bound_c: float | None = None,
) -> TruncationReport:
    """Distance between the Fokker-Planck flow and its F_N truncation, per unit time (d = 1).

    The supremum is taken over (t0, eps_N], where eps_N is the first node at
    which the truncation stops being a positive density (the horizon if never).
    """
    if m0.dim != 1:
        raise DimensionMismatchError("truncation_error requires d = 1", 1, m0.dim)
    if m0.order > order:
        raise ConfigError(f"initial measure of order {m0.order} does not lie in P_{order}")
    if bound_c is not None and m0.gradient_bound() > bound_c:
        raise PreconditionError("gradient bound <= c", m0.gradient_bound(), bound_c)

    flow = solve_fokker_planck(m0, feedback, time_grid)
    resolution = flow.grid.resolution
    if resolution < 2 * order:
        raise ConfigError(f"solver grid {resolution} cannot carry order {order}")
    index_set = MultiIndexSet(1, order)

    times = time_grid.times
    eta = np.full(times.shape, np.nan)
    positivity_time = float(time_grid.horizon)
    for n in range(1, time_grid.steps + 1):
        truncated = flow.measure(n, index_set)
        if min_density(truncated, resolution).grid_min <= 0.0:
            positivity_time = float(times[n])
            break
        eta[n] = dist_w1_1d(flow.density(n), truncated, resolution=resolution) / (times[n] - time_grid.t0)

    sup_eta = float(np.nanmax(eta)) if np.any(np.isfinite(eta)) else 0.0
    logger.info("Truncation at N=%d: sup eta %.3e, positivity time %.4f", order, sup_eta, positivity_time)
    return TruncationReport(times, eta, sup_eta, positivity_time)
