"""Certified positivity of trigonometric densities (membership in O_N)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from fourier_mfg.config import settings
from fourier_mfg.models.enums import MembershipStatus
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure, batch_densities, evaluate_density
from fourier_mfg.spectral.transforms import TWO_PI, next_power_of_two

logger = logging.getLogger(__name__)


class DensityBounds(NamedTuple):
    """Certified lower bound and grid minimum of a density."""

    certified_lower_bound: float
    grid_min: float


@dataclass(frozen=True)
class MembershipResult:
    """Decision of ``is_in_O_N`` with the evidence it was based on."""

    status: MembershipStatus
    margin: float
    grid_min: float
    resolution: int

    @property
    def inside(self) -> bool:
        return self.status is MembershipStatus.INSIDE


def resolution_cap(dim: int) -> int:
    return settings.positivity_resolution_cap_1d if dim == 1 else settings.positivity_resolution_cap_2d


def _lipschitz_bounds(coeffs: np.ndarray, index_set: MultiIndexSet) -> np.ndarray:
    return 2.0 * TWO_PI * np.abs(coeffs) @ index_set.norms


def min_density(m: FourierMeasure, resolution: int) -> DensityBounds:
    """Grid minimum and the bound grid_min - L sqrt(d)/(2M), L = 4 pi sum |k||m^k|."""
    grid_min = evaluate_density(m, resolution).minimum
    slack = m.gradient_bound() * np.sqrt(m.dim) / (2.0 * resolution)
    return DensityBounds(grid_min - slack, grid_min)


def batch_min_density(coeffs: np.ndarray, index_set: MultiIndexSet, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``min_density`` over the rows of ``coeffs``; returns (certified, grid_min)."""
    coeffs = np.atleast_2d(coeffs)
    densities = batch_densities(coeffs, index_set, resolution)
    grid_min = densities.reshape(coeffs.shape[0], -1).min(axis=1)
    slack = _lipschitz_bounds(coeffs, index_set) * np.sqrt(index_set.dim) / (2.0 * resolution)
    return grid_min - slack, grid_min


def is_in_O_N(m: FourierMeasure, resolution: int, cap: int | None = None) -> MembershipResult:  # noqa: N802
    """Decide strict positivity, doubling the grid while the evidence is ambiguous.

    Never collapses to a bare boolean: INCONCLUSIVE is returned when the cap is reached
    with a positive grid minimum but a non-positive certified bound.
    """
    limit = cap if cap is not None else resolution_cap(m.dim)
    current = next_power_of_two(max(resolution, 2 * m.order))
    while True:
        lower, grid_min = min_density(m, current)
        if lower > 0.0:
            return MembershipResult(MembershipStatus.INSIDE, lower, grid_min, current)
        if grid_min <= 0.0:
            return MembershipResult(MembershipStatus.OUTSIDE, grid_min, grid_min, current)
        if current * 2 > limit:
            logger.warning("Positivity undecided at resolution cap %d (grid min %.3e)", current, grid_min)
            return MembershipResult(MembershipStatus.INCONCLUSIVE, lower, grid_min, current)
        current *= 2


def batch_membership(coeffs: np.ndarray, index_set: MultiIndexSet, resolution: int) -> list[MembershipStatus]:
    """``is_in_O_N`` over many coefficient vectors, refining only the undecided rows."""
    coeffs = np.atleast_2d(coeffs)
    lower, grid_min = batch_min_density(coeffs, index_set, resolution)
    statuses: list[MembershipStatus] = []
    for i in range(coeffs.shape[0]):
        if lower[i] > 0.0:
            statuses.append(MembershipStatus.INSIDE)
        elif grid_min[i] <= 0.0:
            statuses.append(MembershipStatus.OUTSIDE)
        else:
            statuses.append(is_in_O_N(FourierMeasure(index_set, coeffs[i]), resolution * 2).status)
    return statuses
