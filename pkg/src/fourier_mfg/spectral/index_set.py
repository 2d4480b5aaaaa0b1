"""Multi-index sets F_N = {-N+1, ..., N-1}^d and their conjugate-free half F_N^+."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from fourier_mfg.exceptions import ConfigError

SUPPORTED_DIMS = (1, 2)


def is_positive_index(k: tuple[int, ...] | np.ndarray) -> bool:
    """True iff the first nonzero coordinate of k is positive."""
    for component in k:
        if component != 0:
            return bool(component > 0)
    return False


@dataclass(frozen=True)
class MultiIndexSet:
    """Index box of order N in dimension d.

    ``positive`` enumerates F_N^+ in lexicographic order; every coefficient
    vector in the package is stored in that order.
    """

    dim: int
    order: int

    def __post_init__(self) -> None:
        if self.dim not in SUPPORTED_DIMS:
            raise ConfigError(f"Dimension {self.dim} not supported (expected one of {SUPPORTED_DIMS})")
        if self.order < 1:
            raise ConfigError(f"Order must be >= 1, got {self.order}")

    @cached_property
    def full(self) -> np.ndarray:
        """All of F_N as an integer array of shape (|F_N|, d)."""
        axis = range(-self.order + 1, self.order)
        return np.array(list(itertools.product(axis, repeat=self.dim)), dtype=np.int64).reshape(-1, self.dim)

    @cached_property
    def positive(self) -> np.ndarray:
        """F_N^+ as an integer array of shape (|F_N^+|, d)."""
        keep = [is_positive_index(k) for k in self.full]
        return self.full[keep].reshape(-1, self.dim)

    @property
    def size(self) -> int:
        """|F_N^+|, the number of stored complex coefficients."""
        return int(self.positive.shape[0])

    @property
    def full_size(self) -> int:
        return (2 * self.order - 1) ** self.dim

    @property
    def real_dimension(self) -> int:
        """D_N = 2|F_N^+|."""
        return 2 * self.size

    @cached_property
    def norms_sq(self) -> np.ndarray:
        return np.sum(self.positive.astype(np.float64) ** 2, axis=1)

    @cached_property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.norms_sq)

    @cached_property
    def _positions(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(c) for c in k): i for i, k in enumerate(self.positive)}

    def contains(self, k: tuple[int, ...]) -> bool:
        """True iff k lies in F_N (either half or zero)."""
        return len(k) == self.dim and all(abs(c) < self.order for c in k)

    def index_of(self, k: tuple[int, ...]) -> int:
        """Position of k in ``positive``. Raises KeyError outside F_N^+."""
        return self._positions[tuple(int(c) for c in k)]

    def locate(self, k: tuple[int, ...]) -> tuple[int, bool]:
        """Position of k or -k in ``positive`` and whether k lies in the negative half."""
        key = tuple(int(c) for c in k)
        if not any(key):
            raise KeyError("the zero index is not stored")
        if key in self._positions:
            return self._positions[key], False
        return self._positions[tuple(-c for c in key)], True

    def fft_positions(self, resolution: int) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
        """Array positions of k and -k for k in F_N^+ inside an FFT array of side ``resolution``."""
        plus = tuple(np.mod(self.positive[:, j], resolution) for j in range(self.dim))
        minus = tuple(np.mod(-self.positive[:, j], resolution) for j in range(self.dim))
        return plus, minus

    def embedding_into(self, other: MultiIndexSet) -> tuple[np.ndarray, np.ndarray]:
        """Matching positions (self_pos, other_pos) of indices shared with ``other``."""
        if other.dim != self.dim:
            raise ConfigError("cannot embed index sets of different dimensions")
        mine, theirs = [], []
        for i, k in enumerate(self.positive):
            key = tuple(int(c) for c in k)
            if key in other._positions:
                mine.append(i)
                theirs.append(other._positions[key])
        return np.array(mine, dtype=np.int64), np.array(theirs, dtype=np.int64)

    def regularization_threshold(self, epsilon: float) -> float:
        """delta_{N,eps} = eps / (d N^2 |F_N|), the largest admissible mollifier radius."""
        return epsilon / (self.dim * self.order**2 * self.full_size)
