"""Mollification of measure functionals over Fourier coefficients.

For a functional phi, the mollification at m averages phi over the arguments

    (eps Leb + (1 - eps)(m + sum_j 2 Re[r^j e_{-j}])) * f_N,

with each r^j drawn from a radial bump of radius delta on C. Its coefficient
derivatives follow by integrating the bump by parts, so no nested finite
differences are needed.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from fourier_mfg.config import settings
from fourier_mfg.exceptions import MollificationInvariantError, MollifierRadiusError
from fourier_mfg.services.fields import coefficient_gradient
from fourier_mfg.spectral.fejer import fejer_multipliers
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure
from fourier_mfg.spectral.positivity import batch_min_density
from fourier_mfg.spectral.transforms import PeriodicGrid, next_power_of_two

logger = logging.getLogger(__name__)

MeasureFunctional = Callable[[FourierMeasure], float]

CHUNK_SIZE = 64


@dataclass(frozen=True)
class BumpMollifier:
    """rho(z) = C exp(-1 / (1 - |z/delta|^2)) on the disk |z| < delta in C = R^2."""

    radius: float

    @cached_property
    def normalization(self) -> float:
        mass, _ = quad(lambda u: np.exp(-1.0 / (1.0 - u * u)) * 2.0 * np.pi * u, 0.0, 1.0)
        return 1.0 / (mass * self.radius**2)

    def density(self, z: np.ndarray) -> np.ndarray:
        s = np.abs(z) ** 2 / self.radius**2
        with np.errstate(divide="ignore", over="ignore"):
            inside = np.exp(-1.0 / (1.0 - np.minimum(s, 1.0 - 1e-300)))
        return np.where(s < 1.0, self.normalization * inside, 0.0)

    def score(self, z: np.ndarray) -> np.ndarray:
        """grad log rho as a complex number d/dRe + i d/dIm."""
        s = np.abs(z) ** 2 / self.radius**2
        return -2.0 * z / (self.radius**2 * (1.0 - s) ** 2)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` draws by rejection from the uniform disk; the acceptance ratio is rho / max rho."""
        out = np.empty(count, dtype=np.complex128)
        filled = 0
        while filled < count:
            batch = max(2 * (count - filled), 16)
            radii = self.radius * np.sqrt(rng.uniform(size=batch))
            angles = rng.uniform(0.0, 2.0 * np.pi, size=batch)
            s = (radii / self.radius) ** 2
            keep = rng.uniform(size=batch) < np.exp(1.0 - 1.0 / (1.0 - s))
            accepted = (radii * np.exp(1j * angles))[keep][: count - filled]
            out[filled : filled + accepted.size] = accepted
            filled += accepted.size
        return out


def perturbation_stream(mollifier: BumpMollifier, size: int, n_mc: int, seed: int) -> np.ndarray:
    """Antithetic draws r, -r from prod rho, shape (2 ceil(n_mc/2), size).

    Chunks of pairs are drawn from spawned child seeds, so the stream depends on
    the seed only.
    """
    n_pairs = max(1, (n_mc + 1) // 2)
    chunks = [min(CHUNK_SIZE, n_pairs - start) for start in range(0, n_pairs, CHUNK_SIZE)]
    children = np.random.SeedSequence(seed).spawn(len(chunks))
    draws = []
    for count, child in zip(chunks, children, strict=True):
        rng = np.random.Generator(np.random.Philox(child))
        draws.append(mollifier.sample(rng, count * size).reshape(count, size))
    half = np.concatenate(draws, axis=0)
    out = np.empty((2 * n_pairs, size), dtype=np.complex128)
    out[0::2] = half
    out[1::2] = -half
    return out


def check_radius(index_set: MultiIndexSet, epsilon: float, radius: float | None) -> float:
    """The radius to use, defaulting to delta_{N,eps}.

    Raises:
        MollifierRadiusError: radius above delta_{N,eps}.
    """
    threshold = index_set.regularization_threshold(epsilon)
    if radius is None:
        return threshold
    if radius > threshold:
        raise MollifierRadiusError(radius, threshold)
    return radius


def mollified_arguments(m: FourierMeasure, order: int, epsilon: float, r: np.ndarray) -> np.ndarray:
    """Coefficients f^k (1 - eps)(m^k + r^k) of the mollified arguments, one row per draw."""
    base = m.with_order(order)
    return fejer_multipliers(base.index_set) * (1.0 - epsilon) * (base.coeffs + r)


def _verify_positive(arguments: np.ndarray, index_set: MultiIndexSet) -> None:
    resolution = max(64, next_power_of_two(4 * index_set.order))
    _, grid_min = batch_min_density(arguments, index_set, resolution)
    bad = np.flatnonzero(grid_min <= 0.0)
    if bad.size:
        raise MollificationInvariantError(int(bad[0]), float(grid_min[bad[0]]))


class MollifiedValue(NamedTuple):
    value: float
    standard_error: float


class MollifiedDerivative(NamedTuple):
    """Coefficient derivatives over F_N^+ with per-mode standard errors of Re and Im."""

    coefficients: np.ndarray
    standard_error: np.ndarray


def _evaluate(phi: MeasureFunctional, index_set: MultiIndexSet, arguments: np.ndarray) -> np.ndarray:
    """phi on every row, in chunks run on the thread pool and gathered in draw order."""
    chunks = [arguments[i : i + CHUNK_SIZE] for i in range(0, arguments.shape[0], CHUNK_SIZE)]

    def run(block: np.ndarray) -> list[float]:
        return [float(phi(FourierMeasure(index_set, row))) for row in block]

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        results = list(pool.map(run, chunks))
    return np.concatenate([np.asarray(block, dtype=np.float64) for block in results])


def _draws(
    m: FourierMeasure, order: int, epsilon: float, radius: float | None, n_mc: int, seed: int
) -> tuple[MultiIndexSet, BumpMollifier, np.ndarray, np.ndarray]:
    index_set = MultiIndexSet(m.dim, order)
    mollifier = BumpMollifier(check_radius(index_set, epsilon, radius))
    r = perturbation_stream(mollifier, index_set.size, n_mc, seed)
    arguments = mollified_arguments(m, order, epsilon, r)
    _verify_positive(arguments, index_set)
    return index_set, mollifier, r, arguments


def mollify(
    phi: MeasureFunctional,
    m: FourierMeasure,
    order: int,
    epsilon: float,
    radius: float | None = None,
    n_mc: int = 256,
    seed: int = 0,
) -> MollifiedValue:
    """Monte-Carlo mollification of ``phi`` at m.

    Raises:
        MollifierRadiusError: radius above delta_{N,eps}.
        MollificationInvariantError: a mollified argument is not a positive density.
    """
    index_set, _, _, arguments = _draws(m, order, epsilon, radius, n_mc, seed)
    values = _evaluate(phi, index_set, arguments)
    pairs = 0.5 * (values[0::2] + values[1::2])
    error = float(np.std(pairs, ddof=1) / np.sqrt(pairs.size)) if pairs.size > 1 else 0.0
    return MollifiedValue(float(np.mean(pairs)), error)


def mollified_derivative(
    phi: MeasureFunctional,
    m: FourierMeasure,
    order: int,
    epsilon: float,
    radius: float | None = None,
    n_mc: int = 256,
    seed: int = 0,
) -> MollifiedDerivative:
    """d_{m^k} of the mollification, k in F_N^+, via -1/2 E[(phi(r) - phi(0)) conj(score(r))].

    Subtracting phi at r = 0 leaves the mean unchanged because the score has mean zero.
    """
    index_set, mollifier, r, arguments = _draws(m, order, epsilon, radius, n_mc, seed)
    values = _evaluate(phi, index_set, arguments)
    center = float(phi(FourierMeasure(index_set, mollified_arguments(m, order, epsilon, np.zeros(index_set.size)))))
    samples = -0.5 * (values - center)[:, np.newaxis] * np.conj(mollifier.score(r))
    pairs = 0.5 * (samples[0::2] + samples[1::2])
    count = pairs.shape[0]
    if count > 1:
        error = (np.std(pairs.real, axis=0, ddof=1) + 1j * np.std(pairs.imag, axis=0, ddof=1)) / np.sqrt(count)
    else:
        error = np.zeros(index_set.size, dtype=np.complex128)
    return MollifiedDerivative(np.mean(pairs, axis=0), error)


def mollified_gradient_field(
    derivative: MollifiedDerivative | np.ndarray, index_set: MultiIndexSet, grid: PeriodicGrid
) -> np.ndarray:
    """grad_x of the mollified flat derivative sum_k D^k e_k on the grid, shape (d, M, ..., M)."""
    coefficients = derivative.coefficients if isinstance(derivative, MollifiedDerivative) else derivative
    return coefficient_gradient(coefficients, index_set, grid)
