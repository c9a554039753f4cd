"""Exact Boltzmann distributions by full enumeration of ``2**n`` states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .empirical import EmpiricalDistribution
from .ising import MAX_SPINS, Model, SpinConfiguration, energies

__all__ = [
    "ENERGY_DECIMALS",
    "GibbsDistribution",
    "Spectrum",
    "energy_table",
    "boltzmann",
    "spectrum",
    "ground_states",
    "sample_exact",
]

# energies are bucketed into levels after rounding to 1e-9
ENERGY_DECIMALS = 9


@lru_cache(maxsize=64)
def energy_table(model: Model) -> np.ndarray:
    """Read-only energy vector of ``model`` indexed by configuration."""
    if model.n > MAX_SPINS:
        raise ValueError(f"exact enumeration is limited to n <= {MAX_SPINS}")
    table = energies(model)
    table.setflags(write=False)
    return table


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return beta


@dataclass(frozen=True, eq=False)
class GibbsDistribution:
    n: int
    beta: float
    probs: np.ndarray

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])

    def ground_mass(self, indices) -> float:
        return float(self.probs[np.asarray(list(indices), dtype=np.int64)].sum())


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Distinct energy levels (ascending) with their degeneracies."""

    energies: np.ndarray
    degeneracies: np.ndarray

    def __iter__(self):
        return iter(zip(self.energies.tolist(), self.degeneracies.tolist()))

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_degeneracy(self) -> int:
        return int(self.degeneracies[0])


def boltzmann(model: Model, beta: float) -> GibbsDistribution:
    """``p(c) = exp(-beta (E(c) - E_min)) / Z`` for every configuration.

    The energy shift keeps the exponent non-positive, so the vector stays
    finite for any finite ``beta``.
    """
    beta = _check_beta(beta)
    e = energy_table(model)
    weights = np.exp(-beta * (e - e.min()))
    probs = weights / weights.sum()
    probs.setflags(write=False)
    return GibbsDistribution(model.n, beta, probs)


def _levels(e: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rounded = np.round(e, ENERGY_DECIMALS)
    return np.unique(rounded, return_inverse=True, return_counts=True)


def spectrum(model: Model) -> Spectrum:
    levels, _, counts = _levels(energy_table(model))
    return Spectrum(levels, counts.astype(np.int64))


def ground_states(model: Model) -> set[SpinConfiguration]:
    e = np.round(energy_table(model), ENERGY_DECIMALS)
    return {SpinConfiguration(int(i), model.n) for i in np.flatnonzero(e == e.min())}


def sample_exact(model: Model, beta: float, m: int, seed=None) -> EmpiricalDistribution:
    """``m`` i.i.d. draws from the exact Gibbs vector by inverse CDF."""
    if int(m) != m or m < 1:
        raise ValueError(f"sample count must be a positive integer, got {m}")
    probs = boltzmann(model, beta).probs
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    u = rng.random(int(m)) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, len(cdf) - 1, out=idx)
    return EmpiricalDistribution.from_indices(model.n, idx)
