"""Fourier representation of measures on the torus."""

from fourier_mfg.spectral.distances import dist_dminus2_surrogate, dist_tv, dist_w1_1d
from fourier_mfg.spectral.fejer import convolve_fejer, fejer_coefficients, fejer_multipliers
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure, evaluate_density
from fourier_mfg.spectral.positivity import DensityBounds, MembershipResult, is_in_O_N, min_density
from fourier_mfg.spectral.transforms import PeriodicGrid

__all__ = [
    "DensityBounds",
    "DensityGrid",
    "FourierMeasure",
    "MembershipResult",
    "MultiIndexSet",
    "PeriodicGrid",
    "convolve_fejer",
    "dist_dminus2_surrogate",
    "dist_tv",
    "dist_w1_1d",
    "evaluate_density",
    "fejer_coefficients",
    "fejer_multipliers",
    "is_in_O_N",
    "min_density",
]
