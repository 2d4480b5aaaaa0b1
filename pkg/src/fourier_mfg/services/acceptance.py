"""Acceptance battery: property checks at desk scale, one ``CheckResult`` per check.

Every check reads its sizes from ``RunConfig`` so the whole battery can be
scaled down for smoke runs.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterator, Sequence
from typing import NamedTuple

import numpy as np

from fourier_mfg.config import RunConfig, SolverConfig, parse_index
from fourier_mfg.exceptions import ConfigError, FourierMfgError
from fourier_mfg.models.enums import CheckStatus, HamiltonianKind
from fourier_mfg.models.reports import CheckResult, SuiteSummary
from fourier_mfg.services.characteristics import (
    MollifiedDrift,
    build_drift,
    flow_map_log_determinant,
    integrate_flow,
    truncation_error,
)
from fourier_mfg.services.fields import ValueField, ZeroField, make_field
from fourier_mfg.services.hjb_checker import (
    hjb_residual,
    hjb_residual_gradient,
    master_residual,
    one_sided_lipschitz_test,
)
from fourier_mfg.services.mfcp import finite_difference_derivatives, semiconcavity_gap, value
from fourier_mfg.services.mfg_solver import TimeGrid, solve_mfg, terminal_values
from fourier_mfg.services.model import ModelSpec, check_duality, initial_measure, make_hamiltonian
from fourier_mfg.services.mollification import mollified_derivative, mollify
from fourier_mfg.services.sampler import GammaSpec, event_frequencies, sample_gamma_n
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.distances import dist_w1_1d
from fourier_mfg.spectral.fejer import convolve_fejer
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure
from fourier_mfg.spectral.positivity import is_in_O_N
from fourier_mfg.spectral.transforms import next_power_of_two

logger = logging.getLogger(__name__)

# Allowed growth of the fitted density/gradient constant from the smallest to the largest order.
UNIFORMITY_FACTOR = 1.5
DRIFT_EPSILONS = (0.1, 0.05)
# Value-function drifts solve one MFG per mollified argument and stage.
VALUE_DRIFT_DRAWS = 4
VALUE_DRIFT_STEPS = 10
DRIFT_SOLVER_STEPS = 40


class CheckOutcome(NamedTuple):
    status: CheckStatus
    detail: str


def _outcome(passed: bool, detail: str) -> CheckOutcome:
    return CheckOutcome(CheckStatus.PASSED if passed else CheckStatus.FAILED, detail)


def smooth_measure(dim: int, order: int, amplitude: float = 0.1, phase: float = 0.3) -> FourierMeasure:
    """m^k = amplitude e^{i phase |k|} / |k|^2, an asymmetric measure well inside O_N."""
    index_set = MultiIndexSet(dim, order)
    scale = amplitude / max(1.0, float(np.sum(1.0 / index_set.norms_sq)))
    return FourierMeasure(index_set, scale * np.exp(1j * phase * index_set.norms) / index_set.norms_sq)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _random_measure(rng: np.random.Generator, dim: int, order: int, amplitude: float = 0.1) -> FourierMeasure:
    index_set = MultiIndexSet(dim, order)
    noise = rng.normal(size=index_set.size) + 1j * rng.normal(size=index_set.size)
    scale = amplitude / max(1.0, float(np.sum(1.0 / index_set.norms)))
    return FourierMeasure(index_set, scale * noise / index_set.norms_sq)


def _model_1d(config: RunConfig) -> ModelSpec:
    """The configured model, or the default one-dimensional model when d = 2."""
    if config.dim == 1:
        return ModelSpec.from_run_config(config)
    return ModelSpec.default(1, horizon=config.horizon)


def _non_increasing(values: Sequence[float], slack: float) -> bool:
    return all(b <= a + slack for a, b in zip(values[:-1], values[1:], strict=True))


def check_heat_flow(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    order = 8
    index_set = MultiIndexSet(config.dim, order)
    m0 = smooth_measure(config.dim, order)
    drift = build_drift(ZeroField(index_set), ModelSpec.free(config.dim), config.epsilon, n_mc=2)
    grid = TimeGrid(0.0, config.horizon, config.steps)
    flow = integrate_flow(m0, drift, grid)
    rates = 2.0 * np.pi**2 * index_set.norms_sq
    expected = m0.coeffs[np.newaxis, :] * np.exp(-np.outer(grid.times, rates))
    mode_error = float(np.max(np.abs(flow.modes - expected) / np.abs(expected)))
    log_expected = -2.0 * float(np.sum(rates)) * grid.times
    assert flow.jacobian_log is not None
    log_error = float(np.max(np.abs(flow.jacobian_log - log_expected)) / max(1.0, abs(log_expected[-1])))
    return _outcome(mode_error < 1e-10 and log_error < 1e-8, f"mode rel err {mode_error:.2e}, logJ err {log_error:.2e}")


def check_fejer_convergence(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    x = np.arange(1024) / 1024
    raw = np.exp(np.cos(2 * np.pi * x))
    density = DensityGrid(raw / raw.mean())
    distances = [dist_w1_1d(convolve_fejer(density, n), density) for n in (4, 8, 16, 32, 64)]
    decreasing = all(b < a for a, b in zip(distances[:-1], distances[1:], strict=True))
    return _outcome(decreasing and distances[-1] < 1e-2, "W1: " + ", ".join(f"{d:.2e}" for d in distances))


def check_legendre_duality(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    rng = _rng(config.seed)
    worst = 0.0
    for kind, tilt, radius in ((HamiltonianKind.QUADRATIC, 0.3, 2.0), (HamiltonianKind.RELATIVISTIC, 0.0, 3.0)):
        hamiltonian = make_hamiltonian(kind, tilt)
        for _ in range(100):
            x = rng.uniform(0.0, 1.0, size=config.dim)
            p = rng.uniform(-radius, radius, size=config.dim)
            worst = max(worst, check_duality(hamiltonian, x, p))
    return _outcome(worst < 1e-6, f"max duality residual {worst:.2e}")


def check_mfg_fixed_point(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = ModelSpec.from_run_config(config)
    solver = config.solver().model_copy(update={"max_iterations": min(config.max_iterations, 50)})
    grid = TimeGrid(0.0, config.horizon, config.steps)
    solution = solve_mfg(initial_measure(config), model, grid, solver)
    mass = solution.flow.mass_defect()
    terminal = float(np.max(np.abs(solution.value[-1] - terminal_values(model, solution.flow))))
    passed = solution.residual < 1e-6 and mass < 1e-10 and terminal < 1e-12
    return _outcome(
        passed,
        f"residual {solution.residual:.2e} in {solution.iterations} iterations, mass {mass:.2e}, terminal {terminal:.2e}",
    )


def check_superjet_identity(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = _model_1d(config)
    solver = config.solver()
    m = smooth_measure(1, 4)
    probe = value(0.0, m, model, solver, with_time_derivative=False, cache=cache)
    finite = finite_difference_derivatives(0.0, m, model, solver, cache)
    keep = m.index_set.norms <= 2
    errors = np.abs(finite[keep] - probe.coeff_derivs[keep]) / (np.abs(probe.coeff_derivs[keep]) + 1e-6)
    return _outcome(bool(np.all(errors < 1e-2)), f"max relative gap {float(errors.max()):.2e}")


def check_hjb_residual(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = ModelSpec.from_run_config(config)
    solver = config.solver()
    residuals = []
    for order in (2, 4, 8):
        probe = value(0.0, FourierMeasure.uniform(config.dim, order), model, solver, cache=cache)
        residuals.append(hjb_residual(probe, model, solver, config.bound_c, config.derivative_source, cache).residual)
    passed = _non_increasing(residuals, 1e-9) and residuals[-1] < 1e-2
    return _outcome(passed, "residuals: " + ", ".join(f"{r:.2e}" for r in residuals))


def _mode(config: RunConfig) -> tuple[int, ...]:
    return parse_index(config.mode_index, config.dim)


def check_master_residual(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = ModelSpec.from_run_config(config)
    solver = config.solver()
    k = _mode(config)
    m = smooth_measure(config.dim, config.order)
    probe = value(0.0, m, model, solver, cache=cache)
    master = master_residual(probe, model, solver, k, cache)
    gradient = hjb_residual_gradient(probe, model, solver, k, cache)
    gap = abs(master.value - gradient.value)
    allowed = max(10.0 * gradient.truncation_error, 1e-6)

    free = ModelSpec.free(config.dim, config.horizon)
    free_probe = value(0.0, m, free, solver, cache=cache)
    free_residual = abs(master_residual(free_probe, free, solver, k, cache).value)
    return _outcome(
        gap <= allowed and free_residual < 1e-10,
        f"gap {gap:.2e} (allowed {allowed:.2e}), free-model residual {free_residual:.2e}",
    )


def check_semiconcavity(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = ModelSpec.from_run_config(config)
    solver = config.solver()
    rng = _rng(config.seed)
    gaps = []
    for _ in range(config.suite_trials):
        t = float(rng.uniform(0.0, 0.5 * config.horizon))
        m = _random_measure(rng, config.dim, config.order)
        direction = rng.normal(size=config.dim)
        y = rng.uniform(0.05, 0.1) * direction / np.linalg.norm(direction)
        gaps.append(semiconcavity_gap(t, m, y, model, solver, cache))
    worst = max(gaps)
    bound = config.semiconcavity_bound
    return _outcome(worst <= bound, f"max gap {worst:.3e} (bound {bound:g}) over {len(gaps)} triples")


def _drift_solver(config: RunConfig, order: int) -> SolverConfig:
    """Single-start, coarse-grid solver for drifts that re-solve the MFG at every mollified argument."""
    return config.solver().model_copy(
        update={
            "resolution": next_power_of_two(max(16, 4 * order)),
            "steps": min(config.steps, DRIFT_SOLVER_STEPS),
            "n_starts": 1,
            "tolerance": min(config.tolerance, 1e-12),
            "max_iterations": max(config.max_iterations, 400),
        }
    )


def _value_drifts(
    config: RunConfig, model: ModelSpec, index_set: MultiIndexSet, cache: SolveCache
) -> Iterator[tuple[str, MollifiedDrift]]:
    """Drifts with W1 = W2 = V at every epsilon, at the regularization threshold and half of it."""
    field = ValueField(0.0, index_set, model, _drift_solver(config, index_set.order), cache)
    for epsilon in DRIFT_EPSILONS:
        threshold = index_set.regularization_threshold(epsilon)
        for fraction in (1.0, 0.5):
            drift = build_drift(
                field,
                model,
                epsilon,
                radius=fraction * threshold,
                n_mc=min(config.n_mc, VALUE_DRIFT_DRAWS),
                seed=config.seed,
            )
            yield f"eps={epsilon:g},r={fraction:g}d", drift


def check_jacobian_oracle(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = _model_1d(config)
    index_set = MultiIndexSet(1, 2)
    m0 = smooth_measure(1, 2)
    grid = TimeGrid(0.0, config.flow_horizon, min(config.flow_steps, VALUE_DRIFT_STEPS))
    errors = {}
    for label, drift in _value_drifts(config, model, index_set, cache):
        flow = integrate_flow(m0, drift, grid)
        assert flow.jacobian_log is not None
        errors[label] = abs(np.expm1(flow.jacobian_log[-1] - flow_map_log_determinant(m0, drift, grid)))

    heat = integrate_flow(m0, build_drift(ZeroField(index_set), ModelSpec.free(1), config.epsilon, n_mc=2), grid)
    assert heat.jacobian_log is not None
    heat_error = abs(heat.jacobian_log[-1] + 4.0 * np.pi**2 * float(np.sum(index_set.norms_sq)) * grid.horizon)
    detail = ", ".join(f"{label} {e:.2e}" for label, e in errors.items())
    return _outcome(
        max(errors.values()) < 1e-2 and heat_error < 1e-8, f"det rel err {detail}; heat logJ err {heat_error:.2e}"
    )


def check_truncation(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    model = _model_1d(config)
    resolution = max(config.resolution, 64)
    solver = config.solver().model_copy(update={"resolution": resolution})
    m0 = smooth_measure(1, 4)
    grid = TimeGrid(0.0, config.horizon, config.steps)
    solution = solve_mfg(m0, model, grid, solver)
    sups = [truncation_error(m0, solution.feedback, grid, order).sup_eta for order in (4, 8, 16)]
    passed = _non_increasing(sups, 1e-12) and sups[0] > sups[-1]
    return _outcome(passed, "sup eta: " + ", ".join(f"{s:.2e}" for s in sups))


def check_sampler(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    order = max(config.order, 4)
    spec = GammaSpec(order, config.dim, config.gamma_p)
    samples = sample_gamma_n(spec, config.n_samples, config.seed)
    resolution = max(64, next_power_of_two(4 * order))
    sound = all(is_in_O_N(m, resolution).inside for m in samples.measures)
    freqs = [event_frequencies(samples.measures, n0).freq_a for n0 in (2, 3, 4)]
    passed = sound and _non_increasing([-f for f in freqs], 0.0) and freqs[-1] > freqs[0]
    return _outcome(
        passed,
        f"acceptance {samples.acceptance_rate:.4f}, freq A: " + ", ".join(f"{f:.3f}" for f in freqs),
    )


def check_mollification(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    m = smooth_measure(1, 8)
    uniform = FourierMeasure.uniform(1, 8)

    def phi(measure: FourierMeasure) -> float:
        return dist_w1_1d(measure, uniform)

    exact = phi(m)
    gaps = [
        abs(mollify(phi, m, order, eps, n_mc=config.n_mc, seed=config.seed).value - exact)
        for order, eps in ((8, 0.1), (16, 0.05), (32, 0.02))
    ]
    converging = all(b < a for a, b in zip(gaps[:-1], gaps[1:], strict=True))

    derivative = mollified_derivative(phi, m, 8, config.epsilon, n_mc=config.n_mc, seed=config.seed)
    step = 1e-4
    shift = np.zeros(m.index_set.size, dtype=np.complex128)
    shift[0] = step
    forward = mollify(phi, m.replace(m.coeffs + shift), 8, config.epsilon, n_mc=config.n_mc, seed=config.seed)
    backward = mollify(phi, m.replace(m.coeffs - shift), 8, config.epsilon, n_mc=config.n_mc, seed=config.seed)
    along_real = (forward.value - backward.value) / (2 * step)
    estimate = 2.0 * float(derivative.coefficients[0].real)
    error_bar = 4.0 * 2.0 * float(derivative.standard_error[0].real) + 1e-3
    matches = abs(estimate - along_real) <= error_bar
    return _outcome(
        converging and matches,
        "gaps: " + ", ".join(f"{g:.2e}" for g in gaps) + f"; d/dRe {estimate:.4f} vs fd {along_real:.4f}",
    )


def check_one_sided_lipschitz(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    """Needs at least one conclusive trial and no violation; all-INCONCLUSIVE runs fail."""
    model = ModelSpec.from_run_config(config)
    solver = config.solver()
    order = min(config.order, 2)
    base = smooth_measure(config.dim, order)
    probe = value(0.0, base, model, solver, with_time_derivative=False, cache=cache)
    field = make_field(config.field, model, base.index_set, solver, probe=probe, cache=cache)
    rng = _rng(config.seed)
    counts = {status: 0 for status in CheckStatus}
    for trial in range(config.suite_trials):
        m = base.replace(base.coeffs + 0.2 * _random_measure(rng, config.dim, order, amplitude=0.05).coeffs)
        z = rng.normal(size=base.index_set.size) + 1j * rng.normal(size=base.index_set.size)
        root = rng.normal(size=(config.dim, config.dim))
        report = one_sided_lipschitz_test(
            field,
            m,
            z,
            root @ root.T,
            config.epsilon,
            config.mollifier_radius,
            n_mc=config.n_mc,
            seed=config.seed + trial,
            constant=config.lipschitz_constant,
            bound_c=config.bound_c,
        )
        counts[report.status] += 1
    detail = f"{field.kind} field: " + ", ".join(f"{status}: {count}" for status, count in counts.items() if count)
    return _outcome(counts[CheckStatus.PASSED] > 0 and counts[CheckStatus.FAILED] == 0, detail)


def check_mckean_vlasov_bounds(config: RunConfig, cache: SolveCache) -> CheckOutcome:
    """The fitted constant max(1/min m, max |grad m|) must stay uniform in N for every drift setting."""
    model = ModelSpec.from_run_config(config)
    grid = TimeGrid(0.0, config.flow_horizon, min(config.flow_steps, VALUE_DRIFT_STEPS))
    fitted: dict[str, list[float]] = {}
    for order in (4, 8, 16):
        index_set = MultiIndexSet(config.dim, order)
        m0 = smooth_measure(config.dim, order)
        for label, drift in _value_drifts(config, model, index_set, cache):
            lows, gradients = integrate_flow(m0, drift, grid, with_jacobian=False).density_bounds
            fitted.setdefault(label, []).append(max(1.0 / float(lows.min()), float(gradients.max())))
    passed = all(min(c) > 0 and max(c) <= UNIFORMITY_FACTOR * c[0] for c in fitted.values())
    detail = "; ".join(f"{label} c': " + ", ".join(f"{c:.3f}" for c in cs) for label, cs in fitted.items())
    return _outcome(passed, detail)


CHECKS: dict[str, Callable[[RunConfig, SolveCache], CheckOutcome]] = {
    "heat_flow_exactness": check_heat_flow,
    "fejer_convergence": check_fejer_convergence,
    "legendre_duality": check_legendre_duality,
    "mfg_fixed_point": check_mfg_fixed_point,
    "superjet_identity": check_superjet_identity,
    "hjb_residual_convergence": check_hjb_residual,
    "master_residual_consistency": check_master_residual,
    "displacement_semiconcavity": check_semiconcavity,
    "jacobian_oracle": check_jacobian_oracle,
    "truncation_lemma": check_truncation,
    "sampler_soundness": check_sampler,
    "mollification_convergence": check_mollification,
    "weak_one_sided_lipschitz": check_one_sided_lipschitz,
    "mckean_vlasov_bounds": check_mckean_vlasov_bounds,
}


def run_check(name: str, config: RunConfig, cache: SolveCache) -> CheckResult:
    """Run one check; numerical failures become ERROR rows instead of aborting the battery."""
    if name not in CHECKS:
        raise ConfigError(f"unknown acceptance check '{name}'")
    start = time.perf_counter()
    try:
        outcome = CHECKS[name](config, cache)
    except FourierMfgError as e:
        logger.error("Check %s raised %s: %s", name, type(e).__name__, e)
        outcome = CheckOutcome(CheckStatus.ERROR, f"{type(e).__name__}: {e}")
    seconds = time.perf_counter() - start
    logger.info("Check %s: %s (%.1fs) %s", name, outcome.status, seconds, outcome.detail)
    return CheckResult(name=name, status=outcome.status, detail=outcome.detail, seconds=seconds)


def run_suite(config: RunConfig, names: Sequence[str] | None = None, cache: SolveCache | None = None) -> SuiteSummary:
    """Run the battery in declaration order."""
    cache = cache if cache is not None else SolveCache()
    results = [run_check(name, config, cache) for name in (names or list(CHECKS))]
    failed = sum(r.status in (CheckStatus.FAILED, CheckStatus.ERROR) for r in results)
    passed = sum(r.status is CheckStatus.PASSED for r in results)
    return SuiteSummary(checks=results, passed=passed, failed=failed)
