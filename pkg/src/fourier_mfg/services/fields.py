"""Coefficient fields m -> Z^k(m) over F_N^+ and their real-coordinate Jacobians.

A field plays the role of d_{m^k}W for some functional W. Batches of measures
are passed as coefficient arrays of shape (B, |F_N^+|); ``jacobian`` returns
dZ^k/dRe m^j and dZ^k/dIm m^j stacked on a trailing axis of length 2.
"""

from __future__ import annotations

import logging
from typing import Protocol, runtime_checkable

import numpy as np

from fourier_mfg.config import SolverConfig
from fourier_mfg.exceptions import ConfigError
from fourier_mfg.models.enums import FieldKind
from fourier_mfg.services.mfcp import ValueProbe, admissible_perturbations, value
from fourier_mfg.services.model import KernelSpec, ModelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure
from fourier_mfg.spectral.transforms import PeriodicGrid

logger = logging.getLogger(__name__)


def coefficient_spectrum(derivatives: np.ndarray, index_set: MultiIndexSet, grid: PeriodicGrid) -> np.ndarray:
    """Spectrum of the real function w = sum_k Z^k e_k, i.e. w^k = conj(Z^k) at position k.

    Leading batch axes of ``derivatives`` are kept; the zero mode is left at 0.
    """
    derivatives = np.asarray(derivatives, dtype=np.complex128)
    batch = derivatives.shape[:-1]
    spectrum = np.zeros(batch + grid.shape, dtype=np.complex128)
    plus, minus = index_set.fft_positions(grid.resolution)
    spectrum[(..., *plus)] = np.conj(derivatives)
    spectrum[(..., *minus)] = derivatives
    return spectrum


def coefficient_gradient(derivatives: np.ndarray, index_set: MultiIndexSet, grid: PeriodicGrid) -> np.ndarray:
    """grad_x of sum_k Z^k e_k on the grid, shape (d, ..., M, ..., M)."""
    spectrum = coefficient_spectrum(derivatives, index_set, grid)
    return np.fft.fftn(grid.gradient_spectrum(spectrum), axes=grid.axes).real


@runtime_checkable
class CoefficientField(Protocol):
    """Z^k(m) on F_N^+."""

    kind: FieldKind
    index_set: MultiIndexSet

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray: ...

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray: ...


class ZeroField:
    kind = FieldKind.ZERO

    def __init__(self, index_set: MultiIndexSet):
        self.index_set = index_set

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(coeffs), dtype=np.complex128)

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray:
        size = self.index_set.size
        return np.zeros((size, size, 2), dtype=np.complex128)


class PotentialField:
    """Z^k = phi^k conj(m^k), the coefficient derivative of the convolution potential."""

    kind = FieldKind.POTENTIAL

    def __init__(self, kernel: KernelSpec, index_set: MultiIndexSet):
        if kernel.dim != index_set.dim:
            raise ConfigError("kernel and index set dimensions differ")
        self.kernel = kernel
        self.index_set = index_set
        self._weights = kernel.on_index_set(index_set)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        return self._weights * np.conj(np.asarray(coeffs, dtype=np.complex128))

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros((self.index_set.size, self.index_set.size, 2), dtype=np.complex128)
        diagonal = np.arange(self.index_set.size)
        out[diagonal, diagonal, 0] = self._weights
        out[diagonal, diagonal, 1] = -1j * self._weights
        return out


def superjet_jacobian(
    t: float,
    m: FourierMeasure,
    model: ModelSpec,
    config: SolverConfig,
    cache: SolveCache | None = None,
) -> np.ndarray:
    """Central differences of the superjet d_{m^k}V along Re and Im of every m^j."""
    size = m.index_set.size
    out = np.zeros((size, size, 2), dtype=np.complex128)
    for j in range(size):
        step, (plus, minus, plus_i, minus_i) = admissible_perturbations(m, j, config)

        def derivs(measure: FourierMeasure) -> np.ndarray:
            return value(t, measure, model, config, with_time_derivative=False, cache=cache).coeff_derivs

        out[:, j, 0] = (derivs(plus) - derivs(minus)) / (2 * step)
        out[:, j, 1] = (derivs(plus_i) - derivs(minus_i)) / (2 * step)
    return out


class LinearizedValueField:
    """First-order expansion of the value superjet around a base probe."""

    kind = FieldKind.LINEARIZED

    def __init__(
        self,
        probe: ValueProbe,
        model: ModelSpec,
        config: SolverConfig,
        cache: SolveCache | None = None,
    ):
        self.probe = probe
        self.index_set = probe.index_set
        self._base = probe.measure.coeffs
        self._center = probe.coeff_derivs
        self._jacobian = superjet_jacobian(probe.t, probe.measure, model, config, cache)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        delta = np.asarray(coeffs, dtype=np.complex128) - self._base
        return (
            self._center
            + np.tensordot(delta.real, self._jacobian[:, :, 0], axes=([-1], [1]))
            + np.tensordot(delta.imag, self._jacobian[:, :, 1], axes=([-1], [1]))
        )

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray:
        return self._jacobian


class ValueField:
    """The value superjet re-solved at every measure; expensive but exact up to the solver."""

    kind = FieldKind.VALUE

    def __init__(
        self,
        t: float,
        index_set: MultiIndexSet,
        model: ModelSpec,
        config: SolverConfig,
        cache: SolveCache | None = None,
    ):
        self.t = t
        self.index_set = index_set
        self.model = model
        self.config = config
        self.cache = cache

    def _at(self, coeffs: np.ndarray) -> np.ndarray:
        measure = FourierMeasure(self.index_set, coeffs)
        return value(self.t, measure, self.model, self.config, with_time_derivative=False, cache=self.cache).coeff_derivs

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim == 1:
            return self._at(coeffs)
        return np.stack([self._at(row) for row in coeffs])

    def jacobian(self, coeffs: np.ndarray) -> np.ndarray:
        measure = FourierMeasure(self.index_set, coeffs)
        return superjet_jacobian(self.t, measure, self.model, self.config, self.cache)


def make_field(
    kind: FieldKind,
    model: ModelSpec,
    index_set: MultiIndexSet,
    config: SolverConfig,
    t: float = 0.0,
    probe: ValueProbe | None = None,
    cache: SolveCache | None = None,
) -> CoefficientField:
    """Build a field by kind; the linearized field needs the probe it expands around."""
    if kind is FieldKind.ZERO:
        return ZeroField(index_set)
    if kind is FieldKind.POTENTIAL:
        return PotentialField(model.coupling, index_set)
    if kind is FieldKind.VALUE:
        return ValueField(t, index_set, model, config, cache)
    if probe is None:
        raise ConfigError("the linearized field needs a base probe")
    return LinearizedValueField(probe, model, config, cache)
