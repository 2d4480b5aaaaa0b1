"""Problem data: Hamiltonians, convolution couplings and the Legendre transform."""

from __future__ import annotations

import hashlib
import logging
from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.optimize import minimize

from fourier_mfg.config import parse_index_values
from fourier_mfg.exceptions import ConfigError, LegendreConvergenceError
from fourier_mfg.models.enums import HamiltonianKind
from fourier_mfg.models.reports import StandingAssumptionsReport
from fourier_mfg.spectral.index_set import MultiIndexSet, is_positive_index
from fourier_mfg.spectral.measure import FourierMeasure
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid

if TYPE_CHECKING:
    from fourier_mfg.config import RunConfig

logger = logging.getLogger(__name__)

LEGENDRE_SEARCH_RADIUS = 50.0
LEGENDRE_MAX_ITERATIONS = 100
LEGENDRE_TOLERANCE = 1e-10
DUAL_BOUND_DIRECTIONS = 16
DUAL_BOUND_NODES = 8


def _identity_like(dim: int, trailing: tuple[int, ...]) -> np.ndarray:
    eye = np.eye(dim).reshape((dim, dim) + (1,) * len(trailing))
    return np.broadcast_to(eye, (dim, dim) + trailing).copy()


class Hamiltonian(ABC):
    """Separable Hamiltonian H(x, p), convex in p.

    Arrays are component-first: ``x`` and ``p`` have shape (d, ...), gradients
    (d, ...) and Hessians (d, d, ...).
    """

    kind: HamiltonianKind

    @abstractmethod
    def value(self, x: np.ndarray, p: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def grad_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def hess_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def grad_x(self, x: np.ndarray, p: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def lagrangian(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Closed-form L(x, alpha) = sup_p [-p.alpha - H(x, p)]."""

    @property
    def gradient_growth(self) -> float:
        """Constant c with |d_x H(x, p)| <= c (1 + |p|)."""
        return 0.0

    @abstractmethod
    def velocity_bound(self, radius: float) -> float:
        """sup over |p| <= radius of |d_p H(x, p)|."""


class QuadraticHamiltonian(Hamiltonian):
    """H = |p|^2/2 + tilt sin(2 pi x_1) p_1."""

    kind = HamiltonianKind.QUADRATIC

    def __init__(self, tilt: float = 0.0):
        self.tilt = float(tilt)

    def _shift(self, x: np.ndarray, like: np.ndarray) -> np.ndarray:
        shift = np.zeros(np.broadcast_shapes(x.shape, like.shape))
        if self.tilt:
            shift[0] = self.tilt * np.sin(TWO_PI * x[0])
        return shift

    def value(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum(p**2, axis=0) + np.sum(self._shift(x, p) * p, axis=0)

    def grad_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return p + self._shift(x, p)

    def hess_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return _identity_like(p.shape[0], p.shape[1:])

    def grad_x(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(x.shape, p.shape))
        if self.tilt:
            out[0] = TWO_PI * self.tilt * np.cos(TWO_PI * x[0]) * p[0]
        return out

    def lagrangian(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum((alpha + self._shift(x, alpha)) ** 2, axis=0)

    @property
    def gradient_growth(self) -> float:
        return TWO_PI * abs(self.tilt)

    def velocity_bound(self, radius: float) -> float:
        return radius + abs(self.tilt)

    def __repr__(self) -> str:
        return f"QuadraticHamiltonian(tilt={self.tilt!r})"


class RelativisticHamiltonian(Hamiltonian):
    """H = sqrt(1 + |p|^2)."""

    kind = HamiltonianKind.RELATIVISTIC

    def value(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return np.sqrt(1.0 + np.sum(p**2, axis=0))

    def grad_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return p / self.value(x, p)

    def hess_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        h = self.value(x, p)
        outer = np.einsum("i...,j...->ij...", p, p)
        return (_identity_like(p.shape[0], p.shape[1:]) * h**2 - outer) / h**3

    def grad_x(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return np.zeros_like(p, dtype=np.float64)

    def lagrangian(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        speed_sq = np.sum(alpha**2, axis=0)
        with np.errstate(invalid="ignore"):
            return np.where(speed_sq < 1.0, -np.sqrt(np.clip(1.0 - speed_sq, 0.0, None)), np.inf)

    def velocity_bound(self, radius: float) -> float:
        return radius / np.sqrt(1.0 + radius**2)

    def __repr__(self) -> str:
        return "RelativisticHamiltonian()"


def make_hamiltonian(kind: HamiltonianKind, tilt: float = 0.0) -> Hamiltonian:
    if kind is HamiltonianKind.QUADRATIC:
        return QuadraticHamiltonian(tilt)
    if tilt:
        raise ConfigError("hamiltonian_tilt is only supported for the quadratic Hamiltonian")
    return RelativisticHamiltonian()


# Legendre transform


def _maximize_conjugate(
    hamiltonian: Hamiltonian,
    x: np.ndarray,
    alpha: np.ndarray,
    search_radius: float,
    max_iterations: int,
    tolerance: float,
) -> tuple[float, np.ndarray]:
    """Maximize -p.alpha - H(x, p); returns (value, maximizer)."""

    def objective(p: np.ndarray) -> float:
        return float(-p @ alpha - hamiltonian.value(x, p))

    p = -alpha.copy()
    value = objective(p)
    for _ in range(max_iterations):
        gradient = -alpha - hamiltonian.grad_p(x, p)
        if np.linalg.norm(gradient) < tolerance:
            return value, p
        step = np.linalg.solve(hamiltonian.hess_p(x, p), gradient)
        scale = 1.0
        floor = value - 1e-14 * max(1.0, abs(value))
        while scale > 1e-12:
            candidate = p + scale * step
            candidate_value = objective(candidate)
            if np.isfinite(candidate_value) and candidate_value >= floor:
                break
            scale *= 0.5
        else:
            break
        p, value = candidate, candidate_value

    logger.debug("Newton did not converge for alpha=%s; falling back to grid search", alpha)
    dim = alpha.size
    axis = np.linspace(-search_radius, search_radius, 2001 if dim == 1 else 201)
    mesh = np.array(np.meshgrid(*([axis] * dim), indexing="ij")).reshape(dim, -1)
    values = -(alpha @ mesh) - hamiltonian.value(x[:, np.newaxis], mesh)
    start = mesh[:, int(np.argmax(values))]
    result = minimize(
        lambda q: -objective(q),
        start,
        jac=lambda q: alpha + hamiltonian.grad_p(x, q),
        method="L-BFGS-B",
        bounds=[(-search_radius, search_radius)] * dim,
        options={"gtol": tolerance, "maxiter": 500},
    )
    p = np.asarray(result.x, dtype=np.float64)
    value = objective(p)
    residual = float(np.linalg.norm(-alpha - hamiltonian.grad_p(x, p)))
    if np.max(np.abs(p)) >= search_radius * (1.0 - 1e-6) or residual > 1e-6:
        raise LegendreConvergenceError(
            f"Legendre maximizer not found within radius {search_radius} (gradient residual {residual:.2e})",
            best_value=value,
            maximizer=p,
        )
    return value, p


def legendre_maximizer(
    hamiltonian: Hamiltonian,
    x: np.ndarray,
    alpha: np.ndarray,
    search_radius: float = LEGENDRE_SEARCH_RADIUS,
    max_iterations: int = LEGENDRE_MAX_ITERATIONS,
    tolerance: float = LEGENDRE_TOLERANCE,
) -> tuple[float, np.ndarray]:
    """L(x, alpha) and the maximizing p, for a single point."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    alpha_arr = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    return _maximize_conjugate(hamiltonian, x_arr, alpha_arr, search_radius, max_iterations, tolerance)


def legendre_transform(
    hamiltonian: Hamiltonian,
    x: np.ndarray,
    alpha: np.ndarray,
    search_radius: float = LEGENDRE_SEARCH_RADIUS,
) -> float:
    """L(x, alpha) = sup_p [-p.alpha - H(x, p)] by damped Newton from p0 = -alpha.

    Raises:
        LegendreConvergenceError: carrying the best value found.
    """
    value, _ = legendre_maximizer(hamiltonian, x, alpha, search_radius=search_radius)
    return value


def check_duality(hamiltonian: Hamiltonian, x: np.ndarray, p: np.ndarray) -> float:
    """|L(x, -d_pH(x,p)) - (p.d_pH(x,p) - H(x,p))|."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    velocity = hamiltonian.grad_p(x_arr, p_arr)
    lhs = legendre_transform(hamiltonian, x_arr, -velocity)
    rhs = float(p_arr @ velocity - hamiltonian.value(x_arr, p_arr))
    return abs(lhs - rhs)


class DualHamiltonian(Hamiltonian):
    """The Lagrangian L(x, .) viewed as a Hamiltonian, evaluated point by point.

    Transforming it again recovers the original H, which is how the
    involution property is exercised.
    """

    def __init__(self, primal: Hamiltonian):
        self.primal = primal
        self.kind = primal.kind

    def value(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        if p.ndim == 1:
            return np.asarray(legendre_maximizer(self.primal, x, p)[0])
        columns = p.reshape(p.shape[0], -1)
        points = np.broadcast_to(np.asarray(x, dtype=np.float64).reshape(p.shape[0], -1), columns.shape)
        values = [legendre_maximizer(self.primal, points[:, i], columns[:, i])[0] for i in range(columns.shape[1])]
        return np.array(values).reshape(p.shape[1:])

    def grad_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return -legendre_maximizer(self.primal, x, p)[1]

    def hess_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        _, maximizer = legendre_maximizer(self.primal, x, p)
        return np.linalg.inv(self.primal.hess_p(np.atleast_1d(x), maximizer))

    def grad_x(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        _, maximizer = legendre_maximizer(self.primal, x, p)
        return -self.primal.grad_x(np.atleast_1d(x), maximizer)

    def lagrangian(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        return self.primal.value(np.atleast_1d(x), np.atleast_1d(alpha))

    def velocity_bound(self, radius: float) -> float:
        """max |p*| over sampled alpha with |alpha| <= radius, p* the primal maximizer.

        Samples two shells of 16 directions in the plane against 8 nodes in x_1,
        which covers every direction used in d = 1. Infinite once alpha leaves
        the range of d_pH.
        """
        angles = np.linspace(0.0, TWO_PI, DUAL_BOUND_DIRECTIONS, endpoint=False)
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        nodes = np.arange(DUAL_BOUND_NODES) / DUAL_BOUND_NODES
        best = 0.0
        for shell in (0.5 * radius, radius):
            for alpha in shell * directions:
                for x1 in nodes:
                    try:
                        _, maximizer = legendre_maximizer(self.primal, np.array([x1, 0.0]), alpha)
                    except LegendreConvergenceError:
                        return float(np.inf)
                    best = max(best, float(np.linalg.norm(maximizer)))
        return best


# Couplings


class CouplingValue(NamedTuple):
    """F(m) and the coefficients f^k = phi^k m^k, k in F_N^+, of its centered flat derivative."""

    potential: float
    derivative: np.ndarray


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Even real kernel phi given by coefficients phi^k, stored on F^+ and k = 0."""

    dim: int
    coefficients: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized: dict[tuple[int, ...], float] = {}
        for key, raw in self.coefficients.items():
            k = tuple(int(c) for c in key)
            if len(k) != self.dim:
                raise ConfigError(f"Kernel index {key} does not match dimension {self.dim}")
            value = complex(raw)
            if abs(value.imag) > 0.0:
                raise ConfigError(f"Kernel coefficient at {k} must be real (even kernel)")
            if any(k) and not is_positive_index(k):
                k = tuple(-c for c in k)
            normalized[k] = normalized.get(k, 0.0) + value.real
        object.__setattr__(self, "coefficients", MappingProxyType(normalized))

    @classmethod
    def zero(cls, dim: int) -> KernelSpec:
        return cls(dim, {})

    @classmethod
    def cosine(cls, dim: int, amplitude: float) -> KernelSpec:
        """phi(x) = amplitude cos(2 pi x_1)."""
        return cls(dim, {(1,) + (0,) * (dim - 1): amplitude / 2.0})

    @classmethod
    def from_text(cls, text: str, dim: int) -> KernelSpec:
        return cls(dim, parse_index_values(text, dim))

    @property
    def is_zero(self) -> bool:
        return not any(self.coefficients.values())

    @property
    def order(self) -> int:
        """Smallest N with the kernel supported in F_N."""
        if not self.coefficients:
            return 1
        return 1 + max(max(abs(c) for c in k) for k in self.coefficients)

    def scaled(self, factor: float) -> KernelSpec:
        return KernelSpec(self.dim, {k: factor * v for k, v in self.coefficients.items()})

    def value_at(self, k: tuple[int, ...]) -> float:
        key = tuple(int(c) for c in k)
        if any(key) and not is_positive_index(key):
            key = tuple(-c for c in key)
        return self.coefficients.get(key, 0.0)

    def on_index_set(self, index_set: MultiIndexSet) -> np.ndarray:
        return np.array([self.value_at(tuple(k)) for k in index_set.positive], dtype=np.float64)

    def spectrum(self, grid: PeriodicGrid) -> np.ndarray:
        """phi^k at FFT positions k and -k."""
        out = np.zeros(grid.shape, dtype=np.float64)
        for k, value in self.coefficients.items():
            if max(abs(c) for c in k) >= grid.resolution // 2:
                raise ConfigError(f"Kernel mode {k} is not resolved on a {grid.resolution}-point grid")
            out[tuple(c % grid.resolution for c in k)] = value
            out[tuple(-c % grid.resolution for c in k)] = value
        return out

    def potential(self, m: FourierMeasure) -> float:
        """F(m) = 1/2 sum_{F} phi^k |m^k|^2."""
        weights = self.on_index_set(m.index_set)
        return float(0.5 * self.value_at((0,) * self.dim) + np.sum(weights * np.abs(m.coeffs) ** 2))

    def flat_derivative(self, m: FourierMeasure) -> np.ndarray:
        return self.on_index_set(m.index_set) * m.coeffs

    def potential_from_spectrum(self, spectrum: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
        """F over a batch of FFT-ordered spectra (leading axes kept)."""
        return 0.5 * np.sum(self.spectrum(grid) * np.abs(spectrum) ** 2, axis=grid.axes)

    def derivative_on_grid(self, spectrum: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
        """Centered f(x, m) = (phi * m)(x) - phi^0 on the grid."""
        product = self.spectrum(grid) * spectrum
        product[(..., *((0,) * grid.dim))] = 0.0
        return grid.to_grid(product)

    def lipschitz_bound(self) -> float:
        """sup_x |grad f(x, m)| over probability measures: 4 pi sum_{F^+} |k| |phi^k|."""
        return float(
            sum(2.0 * TWO_PI * np.sqrt(sum(c * c for c in k)) * abs(v) for k, v in self.coefficients.items() if any(k))
        )

    def __repr__(self) -> str:
        items = ", ".join(f"{k}: {v!r}" for k, v in sorted(self.coefficients.items()))
        return f"KernelSpec(dim={self.dim}, {{{items}}})"


def coupling_eval(m: FourierMeasure, kernel: KernelSpec) -> CouplingValue:
    """F(m) and the coefficients of f(., m), centered so that f^0 = 0."""
    return CouplingValue(kernel.potential(m), kernel.flat_derivative(m))


def flat_pairing(derivative: np.ndarray, delta: np.ndarray) -> float:
    """int f d(mu - m) given f^k and (mu - m)^k over F_N^+."""
    return float(2.0 * np.sum(np.real(derivative * np.conj(delta))))


# Model


class ControlBound(NamedTuple):
    """Lipschitz bound P on the value function and the induced bound M on optimal feedbacks."""

    gradient_bound: float
    control_bound: float


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """H, the running coupling F (kernel phi), the terminal coupling G (kernel psi) and T."""

    hamiltonian: Hamiltonian
    coupling: KernelSpec
    terminal: KernelSpec
    horizon: float = 0.5

    def __post_init__(self) -> None:
        if self.coupling.dim != self.terminal.dim:
            raise ConfigError("coupling and terminal kernels must share a dimension")
        if self.horizon <= 0.0:
            raise ConfigError("horizon must be positive")

    @property
    def dim(self) -> int:
        return self.coupling.dim

    @property
    def is_free(self) -> bool:
        """f = g = 0 with H = |p|^2/2, the model whose value function vanishes."""
        return (
            self.coupling.is_zero
            and self.terminal.is_zero
            and isinstance(self.hamiltonian, QuadraticHamiltonian)
            and not self.hamiltonian.tilt
        )

    @classmethod
    def default(
        cls,
        dim: int = 1,
        coupling_amplitude: float = 0.5,
        terminal_amplitude: float = 0.5,
        horizon: float = 0.5,
        hamiltonian: Hamiltonian | None = None,
    ) -> ModelSpec:
        """H = |p|^2/2, phi = a cos(2 pi x_1), psi = b cos(2 pi x_1)."""
        return cls(
            hamiltonian or QuadraticHamiltonian(),
            KernelSpec.cosine(dim, coupling_amplitude),
            KernelSpec.cosine(dim, terminal_amplitude),
            horizon,
        )

    @classmethod
    def free(cls, dim: int = 1, horizon: float = 0.5) -> ModelSpec:
        return cls(QuadraticHamiltonian(), KernelSpec.zero(dim), KernelSpec.zero(dim), horizon)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> ModelSpec:
        return cls(
            make_hamiltonian(config.hamiltonian, config.hamiltonian_tilt),
            KernelSpec.from_text(config.coupling_kernel, config.dim),
            KernelSpec.from_text(config.terminal_kernel, config.dim),
            config.horizon,
        )

    def scaled(self, factor: float) -> ModelSpec:
        """Both kernels multiplied by ``factor``."""
        return ModelSpec(self.hamiltonian, self.coupling.scaled(factor), self.terminal.scaled(factor), self.horizon)

    @cached_property
    def fingerprint(self) -> str:
        text = f"{self.hamiltonian!r}|{self.coupling!r}|{self.terminal!r}|{self.horizon!r}"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def initial_measure(config: RunConfig) -> FourierMeasure:
    """The configured m0; an empty coefficient list is the uniform measure."""
    return FourierMeasure.from_mapping(config.dim, config.order, parse_index_values(config.initial_measure, config.dim))


def control_bound(model: ModelSpec) -> ControlBound:
    """P = (Lip g + T (Lip f + c)) e^{cT} with c the x-growth of H; M = sup_{|p|<=P} |d_pH|."""
    growth = model.hamiltonian.gradient_growth
    lip = model.terminal.lipschitz_bound() + model.horizon * (model.coupling.lipschitz_bound() + growth)
    gradient_bound = lip * float(np.exp(growth * model.horizon))
    return ControlBound(gradient_bound, float(model.hamiltonian.velocity_bound(gradient_bound)))


# Standing assumptions


def translation_quotient(kernel: KernelSpec, m: FourierMeasure, y: np.ndarray) -> float:
    """[F(tau_y m) + F(tau_{-y} m) - 2F(m)] / |y|^2."""
    norm_sq = float(np.sum(np.asarray(y, dtype=np.float64) ** 2))
    if norm_sq == 0.0:
        return 0.0
    forward = kernel.potential(m.translate(y))
    backward = kernel.potential(m.translate(-np.asarray(y)))
    return (forward + backward - 2.0 * kernel.potential(m)) / norm_sq


def flat_derivative_gap(kernel: KernelSpec, m: FourierMeasure, mu: FourierMeasure, epsilon: float = 1e-6) -> float:
    """|(F((1-eps)m + eps mu) - F(m))/eps - int f(., m) d(mu - m)|, which is O(eps)."""
    order = max(m.order, mu.order)
    base, other = m.with_order(order), mu.with_order(order)
    mixed = base.mix(other, epsilon)
    difference = (kernel.potential(mixed) - kernel.potential(base)) / epsilon
    return abs(difference - flat_pairing(kernel.flat_derivative(base), other.coeffs - base.coeffs))


def lagrangian_convexity(hamiltonian: Hamiltonian, x: np.ndarray, alphas: np.ndarray) -> float:
    """Smallest quotient [L(a') - L(a) - d_aL(a).(a' - a)] / |a' - a|^2 over consecutive sample pairs."""
    dual = DualHamiltonian(hamiltonian)
    quotients = []
    for a, b in zip(alphas[:-1], alphas[1:], strict=True):
        gap = b - a
        norm_sq = float(gap @ gap)
        if norm_sq == 0.0:
            continue
        slope = dual.grad_p(x, a)
        excess = float(hamiltonian.lagrangian(x, b) - hamiltonian.lagrangian(x, a) - slope @ gap)
        quotients.append(excess / norm_sq)
    return min(quotients) if quotients else float("nan")


def check_standing_assumptions(
    model: ModelSpec, order: int = 4, n_samples: int = 16, seed: int = 0
) -> StandingAssumptionsReport:
    """Sample the convexity, potential-structure and semi-concavity hypotheses of a model."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    dim = model.dim
    bound = control_bound(model)
    radius = max(1.0, 2.0 * bound.gradient_bound)

    x = rng.uniform(0.0, 1.0, size=(dim, n_samples))
    p = rng.uniform(-radius, radius, size=(dim, n_samples))
    hessians = model.hamiltonian.hess_p(x, p)
    eigenvalues = np.linalg.eigvalsh(np.moveaxis(hessians, (0, 1), (-2, -1)))

    index_set = MultiIndexSet(dim, order)
    scale = 0.1 / max(1, index_set.size)

    def random_measure() -> FourierMeasure:
        noise = rng.normal(size=index_set.size) + 1j * rng.normal(size=index_set.size)
        return FourierMeasure(index_set, scale * noise)

    flat_gaps = {"coupling": 0.0, "terminal": 0.0}
    semiconcavity = {"coupling": 0.0, "terminal": 0.0}
    for _ in range(n_samples):
        m, mu = random_measure(), random_measure()
        y = rng.uniform(-0.1, 0.1, size=dim)
        for name, kernel in (("coupling", model.coupling), ("terminal", model.terminal)):
            flat_gaps[name] = max(flat_gaps[name], flat_derivative_gap(kernel, m, mu))
            semiconcavity[name] = max(semiconcavity[name], translation_quotient(kernel, m, y))

    speed = 0.9 if model.hamiltonian.kind is HamiltonianKind.RELATIVISTIC else 2.0
    alphas = rng.uniform(-speed / np.sqrt(dim), speed / np.sqrt(dim), size=(8, dim))
    convexity = lagrangian_convexity(model.hamiltonian, x[:, 0], alphas)

    report = StandingAssumptionsReport(
        min_hessian_eigenvalue=float(eigenvalues.min()),
        max_hessian_eigenvalue=float(eigenvalues.max()),
        coupling_flat_derivative_gap=flat_gaps["coupling"],
        terminal_flat_derivative_gap=flat_gaps["terminal"],
        coupling_semiconcavity=semiconcavity["coupling"],
        terminal_semiconcavity=semiconcavity["terminal"],
        lagrangian_convexity=convexity,
        gradient_bound=bound.gradient_bound,
        control_bound=bound.control_bound,
    )
    logger.info("Standing assumptions: %s", report.model_dump())
    return report
