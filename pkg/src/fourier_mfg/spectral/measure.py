"""Measures on the torus stored by truncated Fourier coefficients, and grid densities."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from fourier_mfg.exceptions import DimensionMismatchError, ResolutionError
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid, is_power_of_two

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FourierMeasure:
    """Signed unit-mass measure with coefficients m^k, k in F_N^+.

    m^0 = 1 and m^{-k} = conj(m^k) are implicit. Whether the measure is a
    positive density is a separate question, answered by ``positivity.is_in_O_N``.
    """

    index_set: MultiIndexSet
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if coeffs.shape != (self.index_set.size,):
            raise DimensionMismatchError(
                f"Expected {self.index_set.size} coefficients for {self.index_set}, got {coeffs.size}",
                expected=self.index_set.size,
                actual=coeffs.size,
            )
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @property
    def dim(self) -> int:
        return self.index_set.dim

    @property
    def order(self) -> int:
        return self.index_set.order

    @classmethod
    def uniform(cls, dim: int, order: int) -> FourierMeasure:
        index_set = MultiIndexSet(dim, order)
        return cls(index_set, np.zeros(index_set.size, dtype=np.complex128))

    @classmethod
    def from_mapping(cls, dim: int, order: int, values: Mapping[tuple[int, ...], complex]) -> FourierMeasure:
        """Build from {k: m^k}; keys in the negative half are stored conjugated."""
        index_set = MultiIndexSet(dim, order)
        coeffs = np.zeros(index_set.size, dtype=np.complex128)
        for k, value in values.items():
            if not index_set.contains(k):
                raise DimensionMismatchError(f"Index {k} is outside F_{order} in dimension {dim}")
            position, negative = index_set.locate(k)
            coeffs[position] = np.conj(value) if negative else value
        return cls(index_set, coeffs)

    @classmethod
    def point_mass(cls, dim: int, order: int, at: Sequence[float] | None = None) -> FourierMeasure:
        """Coefficients e^{i2pi k.y} of the Dirac mass at y (truncated; not a density)."""
        index_set = MultiIndexSet(dim, order)
        y = np.zeros(dim) if at is None else np.asarray(at, dtype=np.float64)
        return cls(index_set, np.exp(1j * TWO_PI * index_set.positive @ y))

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray, index_set: MultiIndexSet) -> FourierMeasure:
        """Read F_N^+ coefficients from an FFT-ordered spectrum (normalized to unit mass)."""
        plus, _ = index_set.fft_positions(spectrum.shape[-1])
        mass = spectrum[(0,) * index_set.dim]
        return cls(index_set, spectrum[plus] / mass)

    @classmethod
    def from_density(cls, density: DensityGrid, order: int) -> FourierMeasure:
        """Project a grid density onto F_N."""
        if density.resolution < 2 * order:
            raise ResolutionError(density.resolution, order)
        return cls.from_spectrum(density.spectrum(), MultiIndexSet(density.dim, order))

    def coefficient(self, k: tuple[int, ...]) -> complex:
        """m^k for any k (0 outside F_N)."""
        if not any(k):
            return 1.0 + 0.0j
        if not self.index_set.contains(k):
            return 0.0j
        position, negative = self.index_set.locate(k)
        value = complex(self.coeffs[position])
        return value.conjugate() if negative else value

    def replace(self, coeffs: np.ndarray) -> FourierMeasure:
        return FourierMeasure(self.index_set, coeffs)

    def translate(self, y: Sequence[float]) -> FourierMeasure:
        """Push-forward by x -> x - y: coefficients m^k e^{-i2pi k.y}."""
        shift = np.asarray(y, dtype=np.float64)
        return self.replace(self.coeffs * np.exp(-1j * TWO_PI * (self.index_set.positive @ shift)))

    def with_order(self, order: int) -> FourierMeasure:
        """Embed into (or truncate to) F_order."""
        target = MultiIndexSet(self.dim, order)
        coeffs = np.zeros(target.size, dtype=np.complex128)
        mine, theirs = self.index_set.embedding_into(target)
        coeffs[theirs] = self.coeffs[mine]
        return FourierMeasure(target, coeffs)

    def mix(self, other: FourierMeasure, weight: float) -> FourierMeasure:
        """(1 - weight) self + weight other, at the larger order."""
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot mix measures of different dimensions", self.dim, other.dim)
        order = max(self.order, other.order)
        a, b = self.with_order(order), other.with_order(order)
        return a.replace((1.0 - weight) * a.coeffs + weight * b.coeffs)

    def blend_lebesgue(self, epsilon: float) -> FourierMeasure:
        """eps Leb + (1 - eps) m."""
        return self.replace((1.0 - epsilon) * self.coeffs)

    def gradient_bound(self) -> float:
        """Lipschitz bound 4 pi sum_{F_N^+} |k| |m^k| of the density."""
        return float(2.0 * TWO_PI * np.sum(self.index_set.norms * np.abs(self.coeffs)))

    def spectrum(self, grid: PeriodicGrid) -> np.ndarray:
        """FFT-ordered spectrum on ``grid`` (requires M >= 2N)."""
        if grid.dim != self.dim:
            raise DimensionMismatchError("grid and measure dimensions differ", self.dim, grid.dim)
        if grid.resolution < 2 * self.order:
            raise ResolutionError(grid.resolution, self.order)
        spectrum = np.zeros(grid.shape, dtype=np.complex128)
        plus, minus = self.index_set.fft_positions(grid.resolution)
        spectrum[(0,) * self.dim] = 1.0
        spectrum[plus] = self.coeffs
        spectrum[minus] = np.conj(self.coeffs)
        return spectrum

    def allclose(self, other: FourierMeasure, atol: float = 1e-12) -> bool:
        return self.index_set == other.index_set and bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"FourierMeasure(dim={self.dim}, order={self.order}, coeffs={np.array2string(self.coeffs, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Real samples of a density on the uniform grid x_j = j/M."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim not in (1, 2) or len(set(values.shape)) != 1:
            raise DimensionMismatchError(f"Density grid must be a line or a square, got shape {values.shape}")
        if not is_power_of_two(values.shape[0]):
            raise DimensionMismatchError(f"Grid side must be a power of two, got {values.shape[0]}")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @cached_property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.dim, self.resolution)

    @property
    def mass(self) -> float:
        return float(np.mean(self.values))

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray) -> DensityGrid:
        return cls(np.fft.fftn(spectrum).real)

    def spectrum(self) -> np.ndarray:
        return np.fft.ifftn(self.values)


def evaluate_density(m: FourierMeasure, resolution: int) -> DensityGrid:
    """Exact samples of 1 + 2 sum_{F_N^+} Re[m^k e_{-k}] on the M-point grid.

    Raises:
        ResolutionError: if M < 2N.
    """
    if resolution < 2 * m.order:
        raise ResolutionError(resolution, m.order)
    grid = PeriodicGrid(m.dim, resolution)
    return DensityGrid(grid.to_grid(m.spectrum(grid)))


def batch_densities(coeffs: np.ndarray, index_set: MultiIndexSet, resolution: int) -> np.ndarray:
    """Densities of many coefficient vectors at once, shape (B, M, ..., M)."""
    if resolution < 2 * index_set.order:
        raise ResolutionError(resolution, index_set.order)
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    grid = PeriodicGrid(index_set.dim, resolution)
    spectra = np.zeros((coeffs.shape[0], *grid.shape), dtype=np.complex128)
    plus, minus = index_set.fft_positions(resolution)
    batch = np.arange(coeffs.shape[0])[:, np.newaxis]
    spectra[(slice(None),) + (0,) * index_set.dim] = 1.0
    spectra[(batch, *plus)] = coeffs
    spectra[(batch, *minus)] = np.conj(coeffs)
    return np.fft.fftn(spectra, axes=grid.axes).real
