"""Rejection sampling of the truncated Gaussian laws on O_N and their concentration events."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from fourier_mfg.config import settings
from fourier_mfg.exceptions import ConfigError, SamplerAcceptanceError
from fourier_mfg.models.enums import MembershipStatus
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure
from fourier_mfg.spectral.positivity import batch_membership, batch_min_density
from fourier_mfg.spectral.transforms import next_power_of_two

logger = logging.getLogger(__name__)

MIN_DECAY_EXPONENT = 5.0
CHUNK_SIZE = 1024
CHUNKS_PER_ROUND = 8
ACCEPTANCE_FLOOR = 1e-3
ACCEPTANCE_GRACE = 100_000
LATTICE_CUTOFF = 1000


@dataclass(frozen=True)
class GammaSpec:
    """Independent complex Gaussians m^k with variance 1/(2|k|^{2pd}) on Re and Im each."""

    order: int
    dim: int = 1
    decay: float = MIN_DECAY_EXPONENT

    def __post_init__(self) -> None:
        if self.decay < MIN_DECAY_EXPONENT:
            raise ConfigError(f"decay exponent p must be >= {MIN_DECAY_EXPONENT}, got {self.decay}")

    @cached_property
    def index_set(self) -> MultiIndexSet:
        return MultiIndexSet(self.dim, self.order)

    @cached_property
    def standard_deviations(self) -> np.ndarray:
        """Per-mode standard deviation of Re m^k (and of Im m^k)."""
        return self.index_set.norms ** (-self.decay * self.dim) / np.sqrt(2.0)


class GammaSamples(NamedTuple):
    measures: list[FourierMeasure]
    acceptance_rate: float
    proposals: int


class EventFrequencies(NamedTuple):
    freq_a: float
    freq_b: float
    a0: float
    count: int


def _default_resolution(order: int) -> int:
    return max(64, next_power_of_two(4 * order))


def sample_gamma_n(spec: GammaSpec, n: int, seed: int = 0, resolution: int | None = None) -> GammaSamples:
    """Draw ``n`` measures from the Gaussian law restricted to O_N.

    Proposals are drawn in fixed-size chunks from spawned child seeds and tested
    for membership on the thread pool; acceptances are kept in draw order.
    INCONCLUSIVE membership counts as a rejection.

    Raises:
        SamplerAcceptanceError: acceptance below 1e-3 after 1e5 proposals.
    """
    if n < 1:
        raise ConfigError(f"sample count must be >= 1, got {n}")
    index_set = spec.index_set
    if index_set.size == 0:
        return GammaSamples([FourierMeasure.uniform(spec.dim, spec.order) for _ in range(n)], 1.0, n)

    resolution = resolution or _default_resolution(spec.order)
    sigma = spec.standard_deviations
    root = np.random.SeedSequence(seed)

    def draw(child: np.random.SeedSequence) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.Generator(np.random.Philox(child))
        shape = (CHUNK_SIZE, index_set.size)
        coeffs = sigma * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
        statuses = batch_membership(coeffs, index_set, resolution)
        return coeffs, np.array([status is MembershipStatus.INSIDE for status in statuses])

    accepted: list[np.ndarray] = []
    n_accepted = 0
    proposals = 0
    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        while n_accepted < n:
            for coeffs, inside in pool.map(draw, root.spawn(CHUNKS_PER_ROUND)):
                accepted.append(coeffs[inside])
                n_accepted += int(inside.sum())
                proposals += coeffs.shape[0]
            rate = n_accepted / proposals
            logger.debug("Sampler: %d accepted of %d proposals", n_accepted, proposals)
            if proposals >= ACCEPTANCE_GRACE and rate < ACCEPTANCE_FLOOR:
                raise SamplerAcceptanceError(rate, proposals)

    rows = np.concatenate(accepted, axis=0)[:n]
    rate = n_accepted / proposals
    logger.info("Sampled %d measures at order %d (acceptance %.4f)", n, spec.order, rate)
    return GammaSamples([FourierMeasure(index_set, row) for row in rows], rate, proposals)


def lattice_constant(dim: int, cutoff: int = LATTICE_CUTOFF) -> float:
    """c_d = 2 sum_{j != 0} |j|^{-3d/2}, summed for |j|_inf <= cutoff plus a tail bound."""
    axis = np.arange(-cutoff, cutoff + 1, dtype=np.float64)
    if dim == 1:
        partial = float(np.sum(np.abs(axis[axis != 0]) ** -1.5))
        tail = 4.0 / np.sqrt(cutoff)
    else:
        partial = 0.0
        for row in axis:
            norms_sq = row**2 + axis**2
            partial += float(np.sum(norms_sq[norms_sq > 0] ** -1.5))
        tail = 8.0 / cutoff
    return 2.0 * (partial + tail)


def decay_amplitude(dim: int) -> float:
    """a0 with c_d a0 = 2^{-(3d/2 + 1)}."""
    return 2.0 ** (-(1.5 * dim + 1.0)) / lattice_constant(dim)


def event_frequencies(
    samples: Sequence[FourierMeasure], base_order: int, resolution: int | None = None
) -> EventFrequencies:
    """Fractions of samples in A_{N0} and in A_{N0} with the coefficient-decay event beyond F_{N0}.

    A_{N0}: the F_{N0} truncation has minimum at least (2 N0)^{-3d/2}.
    B: additionally |m^k| < a0 |k|^{-5d/2} for every k in F_N^+ outside F_{N0}^+.
    """
    if not samples:
        raise ConfigError("event frequencies need at least one sample")
    first = samples[0]
    dim, order = first.dim, first.order
    if base_order > order:
        raise ConfigError(f"N0={base_order} exceeds the sample order N={order}")

    base = MultiIndexSet(dim, base_order)
    full = np.stack([m.with_order(order).coeffs for m in samples])
    truncated = np.stack([m.with_order(base_order).coeffs for m in samples])
    resolution = resolution or max(256, next_power_of_two(8 * base_order))
    if base.size:
        _, grid_min = batch_min_density(truncated, base, resolution)
    else:
        grid_min = np.ones(len(samples))
    in_a = grid_min >= (2.0 * base_order) ** (-1.5 * dim)

    index_set = MultiIndexSet(dim, order)
    outside = np.array([not base.contains(tuple(int(c) for c in k)) for k in index_set.positive], dtype=bool)
    a0 = decay_amplitude(dim)
    limits = a0 * index_set.norms[outside] ** (-2.5 * dim)
    decays = np.all(np.abs(full[:, outside]) < limits, axis=1)
    in_b = in_a & decays
    return EventFrequencies(float(np.mean(in_a)), float(np.mean(in_b)), a0, len(samples))
