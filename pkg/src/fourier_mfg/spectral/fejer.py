"""Fejer kernel f_N and convolution against it."""

from __future__ import annotations

import numpy as np

from fourier_mfg.exceptions import ResolutionError
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure


def fejer_multipliers(index_set: MultiIndexSet) -> np.ndarray:
    """prod_j (1 - |k_j|/N) for k in F_N^+, in storage order."""
    return np.prod(1.0 - np.abs(index_set.positive) / index_set.order, axis=1)


def fejer_coefficients(index_set: MultiIndexSet) -> dict[tuple[int, ...], float]:
    """Map k -> f_N^k over all of F_N (zero outside F_N is implied)."""
    weights = np.prod(1.0 - np.abs(index_set.full) / index_set.order, axis=1)
    return {tuple(int(c) for c in k): float(w) for k, w in zip(index_set.full, weights, strict=True)}


def convolve_fejer(m: FourierMeasure | DensityGrid, order: int) -> FourierMeasure:
    """m * f_N: coefficients m^k f_N^k on F_N, nothing beyond."""
    if isinstance(m, DensityGrid):
        if m.resolution < 2 * order:
            raise ResolutionError(m.resolution, order)
        source = FourierMeasure.from_density(m, order)
    else:
        source = m.with_order(order)
    return source.replace(source.coeffs * fejer_multipliers(source.index_set))
