"""Empirical distributions over bit-packed spin configurations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .ising import _check_n

__all__ = ["EmpiricalDistribution"]


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Occurrence counts of configuration indices produced by a sampler.

    ``counts`` holds only observed indices, each with a positive count, and is
    stored as a tuple sorted by index so equal sample multisets compare equal.
    """

    n: int
    counts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        items = self.counts.items() if isinstance(self.counts, Mapping) else self.counts
        object.__setattr__(self, "n", _check_n(self.n))
        merged: dict[int, int] = {}
        size = 1 << self.n
        for index, count in items:
            index, count = int(index), int(count)
            if not 0 <= index < size:
                raise ValueError(f"configuration index {index} out of range for n={self.n}")
            if count < 1:
                raise ValueError(f"counts must be >= 1, got {count} for index {index}")
            merged[index] = merged.get(index, 0) + count
        if not merged:
            raise ValueError("empirical distribution needs at least one sample")
        object.__setattr__(self, "counts", tuple(sorted(merged.items())))

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int] | np.ndarray) -> "EmpiricalDistribution":
        indices = np.asarray(indices, dtype=np.int64).ravel()
        if indices.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        keys, counts = np.unique(indices, return_counts=True)
        return cls(n, tuple(zip(keys.tolist(), counts.tolist())))

    @classmethod
    def from_spins(cls, spins: np.ndarray) -> "EmpiricalDistribution":
        """Build from an ``(m, n)`` array of +/-1 spins."""
        spins = np.asarray(spins)
        if spins.ndim != 2:
            raise ValueError("spins must be a 2D array of shape (samples, sites)")
        bits = (spins > 0).astype(np.int64)
        weights = np.int64(1) << np.arange(spins.shape[1], dtype=np.int64)
        return cls.from_indices(spins.shape[1], bits @ weights)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    @property
    def indices(self) -> np.ndarray:
        return np.fromiter((i for i, _ in self.counts), dtype=np.int64, count=len(self.counts))

    @property
    def count_array(self) -> np.ndarray:
        return np.fromiter((c for _, c in self.counts), dtype=np.int64, count=len(self.counts))

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def probability(self, index: int) -> Fraction:
        return Fraction(self.as_dict().get(int(index), 0), self.total)

    def probabilities(self) -> np.ndarray:
        """Dense probability vector of length ``2**n``."""
        q = np.zeros(1 << self.n, dtype=np.float64)
        q[self.indices] = self.count_array / self.total
        return q

    def expand(self) -> np.ndarray:
        """All samples as indices, ascending."""
        return np.repeat(self.indices, self.count_array)

    def __add__(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        if not isinstance(other, EmpiricalDistribution):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("cannot pool distributions with different spin counts")
        return EmpiricalDistribution(self.n, self.counts + other.counts)
