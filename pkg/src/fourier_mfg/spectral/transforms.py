"""Uniform periodic grids and the FFT conventions used throughout the package.

A real function h with Fourier coefficients h^k = int e^{i2pi k.x} h(x) dx is
``h = sum_k h^k e_{-k}``. On an M-point grid ``numpy.fft.ifftn`` of the samples
returns h^k at array position k mod M, and ``numpy.fft.fftn`` inverts it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from fourier_mfg.exceptions import ConfigError
from fourier_mfg.spectral.index_set import SUPPORTED_DIMS

TWO_PI = 2.0 * np.pi


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def next_power_of_two(value: int) -> int:
    return 1 << max(0, int(value - 1).bit_length())


@dataclass(frozen=True)
class PeriodicGrid:
    """Grid x_j = j/M on the d-torus, with spectral helpers acting on the trailing d axes."""

    dim: int
    resolution: int

    def __post_init__(self) -> None:
        if self.dim not in SUPPORTED_DIMS:
            raise ConfigError(f"Dimension {self.dim} not supported")
        if not is_power_of_two(self.resolution):
            raise ConfigError(f"Resolution must be a power of two, got {self.resolution}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @cached_property
    def points(self) -> np.ndarray:
        """Coordinates, shape (d, M, ..., M)."""
        axis = np.arange(self.resolution) / self.resolution
        return np.array(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumber per FFT position, shape (d, M, ..., M)."""
        axis = np.fft.fftfreq(self.resolution, d=1.0 / self.resolution)
        return np.array(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    @cached_property
    def wavenumber_sq(self) -> np.ndarray:
        return np.sum(self.wavenumbers**2, axis=0)

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """False on the Nyquist planes, where odd derivatives are not representable."""
        return np.all(np.abs(self.wavenumbers) < self.resolution // 2, axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with every |k_j| <= M/3."""
        return np.all(np.abs(self.wavenumbers) <= self.resolution // 3, axis=0)

    def heat_factor(self, dt: float) -> np.ndarray:
        """exp(-2 pi^2 |k|^2 dt), the exact half-Laplacian semigroup per mode."""
        return np.exp(-2.0 * np.pi**2 * self.wavenumber_sq * dt)

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(values, axes=self.axes)

    def to_grid(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.fftn(spectrum, axes=self.axes).real

    def _derivative_multiplier(self, batch_ndim: int) -> np.ndarray:
        multiplier = -1j * TWO_PI * self.wavenumbers * self.nyquist_free
        return multiplier.reshape((self.dim,) + (1,) * batch_ndim + self.shape)

    def gradient_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        """Spectra of the partial derivatives, shape (d, ...) with any leading batch axes kept."""
        return self._derivative_multiplier(spectrum.ndim - self.dim) * spectrum[np.newaxis, ...]

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Spectral gradient of grid samples, shape (d, M, ..., M)."""
        return np.fft.fftn(self.gradient_spectrum(self.to_spectral(values)), axes=self.axes).real

    def divergence_spectrum(self, field_spectrum: np.ndarray) -> np.ndarray:
        """Spectrum of div v given the spectra of the components of v, shape (d, ...)."""
        multiplier = self._derivative_multiplier(field_spectrum.ndim - 1 - self.dim)
        return np.sum(multiplier * field_spectrum, axis=0)

    def mean(self, values: np.ndarray) -> np.ndarray:
        """Integral over the torus of grid samples (exact for trigonometric polynomials of degree < M)."""
        return np.mean(values, axis=self.axes)
