"""Value function of the mean field control problem.

V(t, m) is the smallest cost among MFG equilibria found by multi-start damped
Picard iteration; every optimal feedback is an equilibrium, so the global
minimizer is among them whenever some start reaches it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from fourier_mfg.config import SolverConfig, settings
from fourier_mfg.exceptions import (
    FourierMfgError,
    PerturbationExitError,
    PreconditionError,
    ValueComputationError,
)
from fourier_mfg.models.enums import DerivativeSource, MembershipStatus
from fourier_mfg.services.mfg_solver import MfgSolution, TimeGrid, running_cost_rates, solve_mfg
from fourier_mfg.services.model import ModelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.distances import dist_dminus2_surrogate
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure
from fourier_mfg.spectral.positivity import batch_membership, is_in_O_N
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid

logger = logging.getLogger(__name__)

_default_cache = SolveCache(max_entries=settings.solve_cache_max_entries)


def clear_solve_cache() -> None:
    _default_cache.clear()


@dataclass(frozen=True, eq=False)
class Candidate:
    """One converged equilibrium from the multi-start search."""

    start: int
    cost: float
    solution: MfgSolution


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Deduplicated equilibria and the bookkeeping of the search that found them."""

    candidates: tuple[Candidate, ...]
    best: Candidate
    converged_starts: int
    attempted_starts: int
    failures: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ValueProbe:
    """V(t, m) with its coefficient derivatives d_{m^k}V over F_N^+ and time derivatives."""

    t: float
    measure: FourierMeasure
    value: float
    minimizer: MfgSolution | None
    candidates: tuple[Candidate, ...]
    coeff_derivs: np.ndarray
    time_deriv: float | None = None
    coeff_time_derivs: np.ndarray | None = None
    derivative_source: DerivativeSource = DerivativeSource.SUPERJET
    converged_starts: int = 1
    warnings: tuple[str, ...] = ()

    @property
    def index_set(self) -> MultiIndexSet:
        return self.measure.index_set

    def derivative(self, k: tuple[int, ...]) -> complex:
        """d_{m^k}V for any k in F_N minus zero; the negative half is the conjugate."""
        position, negative = self.index_set.locate(k)
        value = complex(self.coeff_derivs[position])
        return value.conjugate() if negative else value


def superjet_coefficients(solution: MfgSolution, index_set: MultiIndexSet, node: int = 0) -> np.ndarray:
    """u_t^{-k} = conj(u_t^k) for k in F_N^+, read from the value function at ``node``."""
    spectrum = solution.value_spectrum(node)
    plus, _ = index_set.fft_positions(solution.grid.resolution)
    return np.conj(spectrum[plus])


def terminal_derivatives(model: ModelSpec, m: FourierMeasure) -> np.ndarray:
    """d_{m^k}G = conj(psi^k m^k)."""
    return np.conj(model.terminal.flat_derivative(m))


def derivative_superjet(probe: ValueProbe) -> dict[tuple[int, ...], complex]:
    """Map k -> d_{m^k}V over F_N minus zero, conjugate-symmetric by construction."""
    derivatives: dict[tuple[int, ...], complex] = {}
    for position, k in enumerate(probe.index_set.positive):
        key = tuple(int(c) for c in k)
        value = complex(probe.coeff_derivs[position])
        derivatives[key] = value
        derivatives[tuple(-c for c in key)] = value.conjugate()
    return derivatives


def _time_grid(t: float, model: ModelSpec, config: SolverConfig) -> TimeGrid:
    return TimeGrid.spanning(t, model.horizon, model.horizon / config.steps)


def _start_fields(
    shape: tuple[int, ...], grid: PeriodicGrid, config: SolverConfig
) -> list[np.ndarray | None]:
    """u = 0 followed by seeded random fields on the modes with |k_j| <= 2."""
    starts: list[np.ndarray | None] = [None]
    if config.n_starts == 1:
        return starts
    low_modes = MultiIndexSet(grid.dim, 3).positive.astype(np.float64)
    phases = np.tensordot(low_modes, grid.points, axes=(1, 0))
    weights = 1.0 / np.sum(low_modes**2, axis=1)
    children = np.random.SeedSequence(config.seed).spawn(config.n_starts - 1)
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        a = rng.normal(size=low_modes.shape[0]) * weights
        b = rng.normal(size=low_modes.shape[0]) * weights
        field = config.start_amplitude * (
            np.tensordot(a, np.cos(TWO_PI * phases), axes=1) + np.tensordot(b, np.sin(TWO_PI * phases), axes=1)
        )
        starts.append(np.broadcast_to(field, shape).copy())
    return starts


def _l2_distance(a: MfgSolution, b: MfgSolution) -> float:
    return float(np.sqrt(np.mean((a.value - b.value) ** 2)))


def _solve_candidates(
    t: float,
    initial: FourierMeasure | DensityGrid,
    model: ModelSpec,
    config: SolverConfig,
    cache: SolveCache,
) -> CandidateSet:
    spectrum_bytes = (
        initial.coeffs.tobytes() if isinstance(initial, FourierMeasure) else np.asarray(initial.values).tobytes()
    )
    key = SolveCache.make_key("candidates", model.fingerprint, config.fingerprint(), float(t), spectrum_bytes)
    cached = cache.get(key)
    if cached is not None:
        return cached

    time_grid = _time_grid(t, model, config)
    grid = PeriodicGrid(model.dim, config.resolution)
    starts = _start_fields((time_grid.steps + 1, *grid.shape), grid, config)

    def run(start: np.ndarray | None) -> MfgSolution:
        return solve_mfg(initial, model, time_grid, config, u_init=start)

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        futures = [pool.submit(run, start) for start in starts]
        outcomes: list[MfgSolution | FourierMfgError] = []
        for future in futures:
            try:
                outcomes.append(future.result())
            except FourierMfgError as e:
                outcomes.append(e)

    distinct: list[Candidate] = []
    failures: list[str] = []
    converged = 0
    for index, outcome in enumerate(outcomes):
        if isinstance(outcome, FourierMfgError):
            failures.append(f"start {index}: {outcome}")
            continue
        converged += 1
        if all(_l2_distance(outcome, other.solution) > config.dedupe_distance for other in distinct):
            distinct.append(Candidate(index, outcome.cost, outcome))

    if not distinct:
        raise ValueComputationError(f"No start converged at t={t}", failures)

    lowest = min(c.cost for c in distinct)
    tied = [c for c in distinct if c.cost - lowest <= config.tie_tolerance]
    best = min(tied, key=lambda c: (c.solution.value_norm(), c.start))
    result = CandidateSet(tuple(distinct), best, converged, len(starts), tuple(failures))
    cache.set(key, result)
    return result


def _require_positive(m: FourierMeasure, config: SolverConfig) -> None:
    membership = is_in_O_N(m, config.resolution)
    if not membership.inside:
        raise PreconditionError(f"O_N membership ({membership.status})", membership.margin, 0.0)


def _probe(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache
) -> tuple[float, np.ndarray, CandidateSet | None]:
    """V(t, m), its superjet and the candidate set (None at the horizon)."""
    if t >= model.horizon - 1e-12:
        return model.terminal.potential(m), terminal_derivatives(model, m), None
    found = _solve_candidates(t, m, model, config, cache)
    return found.best.cost, superjet_coefficients(found.best.solution, m.index_set), found


def _time_derivatives(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache, base: tuple[float, np.ndarray]
) -> tuple[float, np.ndarray]:
    """Central difference in t; second-order one-sided at the ends of [0, T]."""
    horizon = model.horizon
    dt = horizon / config.steps
    h = max(1, round(config.time_probe_fraction * horizon / dt)) * dt
    v0, z0 = base

    def at(s: float) -> tuple[float, np.ndarray]:
        value, coeffs, _ = _probe(min(s, horizon), m, model, config, cache)
        return value, coeffs

    if t - h >= -1e-12 and t + h <= horizon + 1e-12:
        (vp, zp), (vm, zm) = at(t + h), at(max(t - h, 0.0))
        return (vp - vm) / (2 * h), (zp - zm) / (2 * h)
    if t + 2 * h <= horizon + 1e-12:
        (v1, z1), (v2, z2) = at(t + h), at(t + 2 * h)
        return (-3 * v0 + 4 * v1 - v2) / (2 * h), (-3 * z0 + 4 * z1 - z2) / (2 * h)
    (v1, z1), (v2, z2) = at(t - h), at(t - 2 * h)
    return (3 * v0 - 4 * v1 + v2) / (2 * h), (3 * z0 - 4 * z1 + z2) / (2 * h)


def value(
    t: float,
    m: FourierMeasure,
    model: ModelSpec,
    config: SolverConfig,
    with_time_derivative: bool = True,
    cache: SolveCache | None = None,
) -> ValueProbe:
    """V(t, m) by multi-start search over MFG equilibria, with superjet derivatives.

    Raises:
        PreconditionError: m is not certified to lie in O_N.
        ValueComputationError: no start converged.
    """
    cache = cache if cache is not None else _default_cache
    _require_positive(m, config)
    current, coeffs, found = _probe(t, m, model, config, cache)

    warnings: list[str] = []
    candidates: tuple[Candidate, ...] = ()
    minimizer = None
    converged = 1
    if found is not None:
        candidates, minimizer, converged = found.candidates, found.best.solution, found.converged_starts
        if found.converged_starts < found.attempted_starts:
            message = f"{found.converged_starts}/{found.attempted_starts} starts converged at t={t:.4f}"
            logger.warning(message)
            warnings.append(message)

    time_deriv = coeff_time_derivs = None
    if with_time_derivative:
        time_deriv, coeff_time_derivs = _time_derivatives(t, m, model, config, cache, (current, coeffs))

    return ValueProbe(
        t=t,
        measure=m,
        value=current,
        minimizer=minimizer,
        candidates=candidates,
        coeff_derivs=coeffs,
        time_deriv=time_deriv,
        coeff_time_derivs=coeff_time_derivs,
        converged_starts=converged,
        warnings=tuple(warnings),
    )


def value_at_density(
    t: float, density: DensityGrid, model: ModelSpec, config: SolverConfig, cache: SolveCache | None = None
) -> float:
    """V(t, m) for a grid density on the solver grid."""
    if t >= model.horizon - 1e-12:
        grid = density.grid
        return float(model.terminal.potential_from_spectrum(grid.to_spectral(density.values), grid))
    cache = cache if cache is not None else _default_cache
    return _solve_candidates(t, density, model, config, cache).best.cost


def _perturbations(m: FourierMeasure, position: int, step: float) -> list[FourierMeasure]:
    out = []
    for direction in (step, -step, 1j * step, -1j * step):
        coeffs = m.coeffs.copy()
        coeffs[position] += direction
        out.append(m.replace(coeffs))
    return out


def admissible_perturbations(
    m: FourierMeasure, position: int, config: SolverConfig
) -> tuple[float, list[FourierMeasure]]:
    """(h, [m + h e_k, m - h e_k, m + ih e_k, m - ih e_k]) with h halved until all lie in O_N.

    Raises:
        PerturbationExitError: still outside after ``fd_halvings`` halvings.
    """
    step = config.fd_step
    for _ in range(config.fd_halvings + 1):
        perturbed = _perturbations(m, position, step)
        statuses = batch_membership(np.stack([p.coeffs for p in perturbed]), m.index_set, config.resolution)
        if all(status is MembershipStatus.INSIDE for status in statuses):
            return step, perturbed
        step /= 2.0
    k = tuple(int(c) for c in m.index_set.positive[position])
    raise PerturbationExitError(k, step * 2.0)


def wirtinger(d_real: complex | np.ndarray, d_imag: complex | np.ndarray) -> complex | np.ndarray:
    """d/dm^k from partial derivatives along Re m^k and Im m^k."""
    return 0.5 * (d_real - 1j * d_imag)


def finite_difference_derivative(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, position: int, cache: SolveCache | None = None
) -> complex:
    """d_{m^k}V by central differences of V along Re and Im of m^k."""
    step, (plus, minus, plus_i, minus_i) = admissible_perturbations(m, position, config)

    def v(measure: FourierMeasure) -> float:
        return value(t, measure, model, config, with_time_derivative=False, cache=cache).value

    d_real = (v(plus) - v(minus)) / (2 * step)
    d_imag = (v(plus_i) - v(minus_i)) / (2 * step)
    return complex(wirtinger(d_real, d_imag))


def finite_difference_derivatives(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache | None = None
) -> np.ndarray:
    return np.array(
        [finite_difference_derivative(t, m, model, config, i, cache) for i in range(m.index_set.size)],
        dtype=np.complex128,
    )


def dpp_residual(
    t: float, tau: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache | None = None
) -> float:
    """|V(t, m) - [V(tau, m_tau) + int_t^tau (F(m_s) + int L dm_s) ds]| along the minimizer's flow.

    tau is moved to the nearest node of the minimizer's time grid.
    """
    if not t <= tau <= model.horizon:
        raise PreconditionError("t <= tau <= T", tau, t)
    if tau == t:
        return 0.0
    probe = value(t, m, model, config, with_time_derivative=False, cache=cache)
    if probe.minimizer is None:
        return 0.0
    solution = probe.minimizer
    time_grid = solution.time_grid
    node = int(round((tau - t) / time_grid.dt))
    rates = running_cost_rates(solution.flow, solution.feedback, model)
    running = float(trapezoid(rates[: node + 1], dx=time_grid.dt))
    if node >= time_grid.steps:
        later = float(model.terminal.potential_from_spectrum(solution.flow.spectra[-1], solution.grid))
    else:
        later = value_at_density(float(time_grid.times[node]), solution.flow.density(node), model, config, cache)
    return abs(probe.value - (later + running))


def semiconcavity_gap(
    t: float,
    m: FourierMeasure,
    y: np.ndarray,
    model: ModelSpec,
    config: SolverConfig,
    cache: SolveCache | None = None,
) -> float:
    """[V(t, tau_y m) + V(t, tau_{-y} m) - 2 V(t, m)] / |y|^2; 0 for y = 0."""
    shift = np.asarray(y, dtype=np.float64)
    norm_sq = float(shift @ shift)
    if norm_sq == 0.0:
        return 0.0

    def v(measure: FourierMeasure) -> float:
        return value(t, measure, model, config, with_time_derivative=False, cache=cache).value

    return (v(m.translate(shift)) + v(m.translate(-shift)) - 2.0 * v(m)) / norm_sq


def dminus2_lipschitz_ratio(
    t: float,
    m1: FourierMeasure,
    m2: FourierMeasure,
    model: ModelSpec,
    config: SolverConfig,
    cache: SolveCache | None = None,
) -> float:
    """|V(t, m1) - V(t, m2)| / d_{-2}(m1, m2), with a guard for coincident measures."""
    distance = dist_dminus2_surrogate(m1, m2)

    def v(measure: FourierMeasure) -> float:
        return value(t, measure, model, config, with_time_derivative=False, cache=cache).value

    if distance < 1e-12:
        gap = 0.0 if m1.allclose(m2, atol=0.0) else abs(v(m1) - v(m2))
        if gap < 1e-9:
            return 0.0
        raise PreconditionError("d_-2 separation", distance, 1e-12)
    return abs(v(m1) - v(m2)) / distance
