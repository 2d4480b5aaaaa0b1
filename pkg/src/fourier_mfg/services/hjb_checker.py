"""Numerical verification of the Fourier-truncated HJB and weak master equations."""

from __future__ import annotations

import logging

import numpy as np

from fourier_mfg.config import SolverConfig
from fourier_mfg.exceptions import ConfigError, DimensionMismatchError, MollifierRadiusError, PreconditionError
from fourier_mfg.models.enums import CheckStatus, DerivativeSource
from fourier_mfg.models.reports import (
    DerivativeBoundsReport,
    HjbResidualReport,
    HjbTerms,
    LipschitzTestReport,
    MasterResidualReport,
    MasterTerms,
    ResidualGradientReport,
    SymmetryReport,
)
from fourier_mfg.services.fields import CoefficientField, coefficient_gradient
from fourier_mfg.services.mfcp import (
    ValueProbe,
    admissible_perturbations,
    finite_difference_derivatives,
    value,
    wirtinger,
)
from fourier_mfg.services.mollification import BumpMollifier, mollified_arguments, perturbation_stream
from fourier_mfg.services.model import ModelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.fejer import fejer_multipliers
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure, evaluate_density
from fourier_mfg.spectral.positivity import min_density
from fourier_mfg.spectral.transforms import PeriodicGrid, next_power_of_two

logger = logging.getLogger(__name__)


def _pair(z: complex) -> tuple[float, float]:
    return (float(np.real(z)), float(np.imag(z)))


def check_bounded_set(m: FourierMeasure, bound_c: float, resolution: int) -> None:
    """Require m in B_N(c): certified min density >= 1/c and gradient bound <= c.

    Raises:
        PreconditionError: naming the violated bound.
    """
    lower, _ = min_density(m, max(resolution, next_power_of_two(2 * m.order)))
    if lower < 1.0 / bound_c:
        raise PreconditionError("min density >= 1/c", lower, 1.0 / bound_c)
    gradient = m.gradient_bound()
    if gradient > bound_c:
        raise PreconditionError("gradient bound <= c", gradient, bound_c)


def hamiltonian_integral(
    derivatives: np.ndarray, m: FourierMeasure, model: ModelSpec, resolution: int
) -> float:
    """int H(y, grad w(y)) dm(y) with w = sum_k d_{m^k}V e_k."""
    grid = PeriodicGrid(m.dim, max(resolution, 2 * m.order))
    gradient = coefficient_gradient(derivatives, m.index_set, grid)
    density = evaluate_density(m, grid.resolution).values
    return float(grid.mean(model.hamiltonian.value(grid.points, gradient) * density))


def laplacian_pairing(derivatives: np.ndarray, m: FourierMeasure) -> float:
    """sum_{k in F_N} 2 pi^2 |k|^2 d_{m^k}V m^k (real by conjugate symmetry)."""
    weights = 2.0 * np.pi**2 * m.index_set.norms_sq
    return float(np.sum(weights * 2.0 * np.real(derivatives * m.coeffs)))


def hjb_terms(
    time_derivative: float, derivatives: np.ndarray, m: FourierMeasure, model: ModelSpec, resolution: int
) -> HjbTerms:
    return HjbTerms(
        time_derivative=time_derivative,
        hamiltonian=-hamiltonian_integral(derivatives, m, model, resolution),
        laplacian=-laplacian_pairing(derivatives, m),
        potential=model.coupling.potential(m),
    )


def _require_time_derivative(probe: ValueProbe) -> tuple[float, np.ndarray]:
    if probe.time_deriv is None or probe.coeff_time_derivs is None:
        raise ConfigError("probe carries no time derivative; compute it with with_time_derivative=True")
    return probe.time_deriv, probe.coeff_time_derivs


def hjb_residual(
    probe: ValueProbe,
    model: ModelSpec,
    config: SolverConfig,
    bound_c: float = 4.0,
    derivative_source: DerivativeSource = DerivativeSource.SUPERJET,
    cache: SolveCache | None = None,
) -> HjbResidualReport:
    """|d_tV - int H(y, grad w) dm - sum 2 pi^2 |k|^2 d_{m^k}V m^k + F(m)| at the probe.

    Raises:
        PreconditionError: m lies outside B_N(c).
    """
    m = probe.measure
    check_bounded_set(m, bound_c, config.resolution)
    time_derivative, _ = _require_time_derivative(probe)
    if derivative_source is DerivativeSource.FINITE_DIFFERENCE:
        derivatives = finite_difference_derivatives(probe.t, m, model, config, cache)
    else:
        derivatives = probe.coeff_derivs

    terms = hjb_terms(time_derivative, derivatives, m, model, config.resolution)
    report = HjbResidualReport(
        t=probe.t,
        order=m.order,
        resolution=config.resolution,
        residual=abs(terms.signed_sum()),
        terms=terms,
        derivative_source=derivative_source,
        bound_c=bound_c,
    )
    logger.info("HJB residual at t=%.4f, N=%d: %.3e", probe.t, m.order, report.residual)
    return report


def derivative_bounds(probe: ValueProbe, resolution: int = 256) -> DerivativeBoundsReport:
    """sup_x |grad_x sum_k d_{m^k}V e_k(x)| and sum_{F_N} |k|^4 |d_{m^k}V|^2."""
    index_set = probe.index_set
    grid = PeriodicGrid(index_set.dim, max(resolution, 2 * index_set.order))
    gradient = coefficient_gradient(probe.coeff_derivs, index_set, grid)
    sup_gradient = float(np.max(np.sqrt(np.sum(gradient**2, axis=0))))
    weighted = float(2.0 * np.sum(index_set.norms_sq**2 * np.abs(probe.coeff_derivs) ** 2))
    return DerivativeBoundsReport(t=probe.t, order=index_set.order, sup_gradient=sup_gradient, weighted_sum=weighted)


def _probe_scalars(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache | None
) -> tuple[float, float]:
    """(int H dm, sum_j 2 pi^2 |j|^2 Z^j m^j) at a re-solved probe."""
    derivatives = value(t, m, model, config, with_time_derivative=False, cache=cache).coeff_derivs
    return hamiltonian_integral(derivatives, m, model, config.resolution), laplacian_pairing(derivatives, m)


def _positive_representative(m: FourierMeasure, k: tuple[int, ...]) -> tuple[int, bool]:
    if not m.index_set.contains(k) or not any(k):
        raise ConfigError(f"mode {k} is not in F_{m.order} minus zero")
    return m.index_set.locate(k)


def master_residual(
    probe: ValueProbe,
    model: ModelSpec,
    config: SolverConfig,
    k: tuple[int, ...],
    cache: SolveCache | None = None,
) -> MasterResidualReport:
    """d_tZ^k - d_{m^k} int H dm - d_{m^k} sum_j 2 pi^2 |j|^2 Z^j m^j + f^{-k}.

    Outer derivatives are central differences at re-solved probes; the step is
    ``config.fd_step``, halved while the perturbed measures leave O_N.

    Raises:
        PerturbationExitError: no admissible step was found.
    """
    m = probe.measure
    position, negative = _positive_representative(m, k)
    _, coeff_time_derivs = _require_time_derivative(probe)
    step, (plus, minus, plus_i, minus_i) = admissible_perturbations(m, position, config)

    scalars = [_probe_scalars(probe.t, measure, model, config, cache) for measure in (plus, minus, plus_i, minus_i)]
    d_hamiltonian = wirtinger(
        (scalars[0][0] - scalars[1][0]) / (2 * step), (scalars[2][0] - scalars[3][0]) / (2 * step)
    )
    d_laplacian = wirtinger(
        (scalars[0][1] - scalars[1][1]) / (2 * step), (scalars[2][1] - scalars[3][1]) / (2 * step)
    )
    time_term = complex(coeff_time_derivs[position])
    coupling = complex(np.conj(model.coupling.flat_derivative(m)[position]))
    total = time_term - complex(d_hamiltonian) - complex(d_laplacian) + coupling
    terms = (time_term, -complex(d_hamiltonian), -complex(d_laplacian), coupling)
    if negative:
        total = total.conjugate()
        terms = tuple(term.conjugate() for term in terms)

    return MasterResidualReport(
        t=probe.t,
        index=tuple(int(c) for c in k),
        step=step,
        real=total.real,
        imag=total.imag,
        terms=MasterTerms(
            time_derivative=_pair(terms[0]),
            hamiltonian=_pair(terms[1]),
            laplacian=_pair(terms[2]),
            coupling=_pair(terms[3]),
        ),
    )


def _signed_residual(
    t: float, m: FourierMeasure, model: ModelSpec, config: SolverConfig, cache: SolveCache | None
) -> float:
    probe = value(t, m, model, config, with_time_derivative=True, cache=cache)
    time_derivative, _ = _require_time_derivative(probe)
    return hjb_terms(time_derivative, probe.coeff_derivs, m, model, config.resolution).signed_sum()


def _residual_derivative(
    t: float, m: FourierMeasure, position: int, model: ModelSpec, config: SolverConfig, cache: SolveCache | None
) -> tuple[float, complex]:
    step, (plus, minus, plus_i, minus_i) = admissible_perturbations(m, position, config)
    r = [_signed_residual(t, measure, model, config, cache) for measure in (plus, minus, plus_i, minus_i)]
    return step, complex(wirtinger((r[0] - r[1]) / (2 * step), (r[2] - r[3]) / (2 * step)))


def hjb_residual_gradient(
    probe: ValueProbe,
    model: ModelSpec,
    config: SolverConfig,
    k: tuple[int, ...],
    cache: SolveCache | None = None,
) -> ResidualGradientReport:
    """d_{m^k} of the signed HJB residual by central differences at h and h/2.

    ``truncation_error`` is the gap between the two estimates.
    """
    m = probe.measure
    position, negative = _positive_representative(m, k)
    step, coarse = _residual_derivative(probe.t, m, position, model, config, cache)
    finer = config.model_copy(update={"fd_step": step / 2.0, "fd_halvings": 0})
    _, fine = _residual_derivative(probe.t, m, position, model, finer, cache)
    if negative:
        coarse, fine = coarse.conjugate(), fine.conjugate()
    return ResidualGradientReport(
        index=tuple(int(c) for c in k),
        step=step,
        real=coarse.real,
        imag=coarse.imag,
        truncation_error=abs(coarse - fine),
    )


def schwarz_symmetry(
    probe: ValueProbe,
    model: ModelSpec,
    config: SolverConfig,
    first: tuple[int, ...],
    second: tuple[int, ...],
    cache: SolveCache | None = None,
) -> SymmetryReport:
    """Compare d_{m^j} Z^k with d_{m^k} Z^j for j, k in F_N^+."""
    m = probe.measure
    j, k = m.index_set.index_of(first), m.index_set.index_of(second)

    def cross(outer: int, inner: int) -> complex:
        step, (plus, minus, plus_i, minus_i) = admissible_perturbations(m, outer, config)
        z = [
            complex(value(probe.t, measure, model, config, with_time_derivative=False, cache=cache).coeff_derivs[inner])
            for measure in (plus, minus, plus_i, minus_i)
        ]
        return complex(wirtinger((z[0] - z[1]) / (2 * step), (z[2] - z[3]) / (2 * step)))

    forward, backward = cross(j, k), cross(k, j)
    scale = max(abs(forward), abs(backward), 1e-6)
    return SymmetryReport(
        first=tuple(first),
        second=tuple(second),
        forward=_pair(forward),
        backward=_pair(backward),
        relative_gap=abs(forward - backward) / scale,
    )


def lipschitz_rhs(z: np.ndarray, matrix: np.ndarray, index_set: MultiIndexSet, constant: float) -> float:
    """C |S| sum_q (sum_k |k_q| |z^k|)^2."""
    per_axis = np.abs(index_set.positive).T.astype(np.float64) @ np.abs(z)
    return float(constant * np.linalg.norm(matrix, 2) * np.sum(per_axis**2))


def one_sided_lipschitz_test(
    field: CoefficientField,
    m: FourierMeasure,
    z: np.ndarray,
    matrix: np.ndarray,
    epsilon: float,
    radius: float | None = None,
    n_mc: int = 256,
    seed: int = 0,
    constant: float = 1.0,
    bound_c: float = 4.0,
    resolution: int = 64,
) -> LipschitzTestReport:
    """Monte-Carlo estimate of the weak one-sided Lipschitz quadratic form.

    The integrand pairs A(r) = sum_k f^k (Re Z^k Re z^k + Im Z^k Im z^k) k, with Z
    evaluated at the mollified argument, against B(r) = S sum_l (Re z^l s_Re + Im z^l s_Im) l
    where s is the score of the product mollifier. The mean of A(0).B(r) vanishes,
    so it is subtracted as a control variate; samples come in antithetic pairs.

    Raises:
        PreconditionError: min density below 1/c.
        MollifierRadiusError: radius beyond the regularization threshold.
    """
    index_set = field.index_set
    m = m.with_order(index_set.order)
    lower, _ = min_density(m, max(resolution, next_power_of_two(2 * index_set.order)))
    if lower < 1.0 / bound_c:
        raise PreconditionError("min density >= 1/c", lower, 1.0 / bound_c)
    threshold = index_set.regularization_threshold(epsilon)
    radius = threshold if radius is None else radius
    if radius > threshold:
        raise MollifierRadiusError(radius, threshold)

    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (index_set.size,):
        raise DimensionMismatchError("z must carry one entry per mode of F_N^+", index_set.size, z.shape)
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rhs = lipschitz_rhs(z, matrix, index_set, constant)
    modes = index_set.positive.astype(np.float64)
    fejer = fejer_multipliers(index_set)
    mollifier = BumpMollifier(radius)

    r = perturbation_stream(mollifier, index_set.size, n_mc, seed)
    arguments = mollified_arguments(m, index_set.order, epsilon, r)
    center = mollified_arguments(m, index_set.order, epsilon, np.zeros(index_set.size))
    values = field.evaluate(arguments) - field.evaluate(center)

    weights = fejer[np.newaxis, :] * (values.real * z.real + values.imag * z.imag)
    a = weights @ modes
    score = mollifier.score(r)
    b = ((score.real * z.real + score.imag * z.imag) @ modes) @ matrix.T
    samples = -np.sum(a * b, axis=1)
    pairs = 0.5 * (samples[0::2] + samples[1::2])

    lhs = float(np.mean(pairs))
    standard_error = float(np.std(pairs, ddof=1) / np.sqrt(pairs.size)) if pairs.size > 1 else 0.0
    if standard_error > 0.1 * rhs and standard_error > 0.0:
        status = CheckStatus.INCONCLUSIVE
    elif lhs <= rhs:
        status = CheckStatus.PASSED
    else:
        status = CheckStatus.FAILED
    logger.info("One-sided Lipschitz test: lhs %.3e, rhs %.3e, se %.2e (%s)", lhs, rhs, standard_error, status)
    return LipschitzTestReport(lhs=lhs, rhs_bound=rhs, standard_error=standard_error, n_mc=int(samples.size), status=status)
