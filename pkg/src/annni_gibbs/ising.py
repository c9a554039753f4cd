"""Spin configurations and classical Ising / ANNNI Hamiltonians.

A configuration of ``n`` spins is packed into an integer index: bit ``i`` of
the index is ``b_i`` and the spin is ``S_i = 2 * b_i - 1``.  Every integer in
``[0, 2**n)`` is therefore a valid configuration.

The ANNNI ring energy is::

    H = -J1 * sum_i S_i S_{i+1} + J2 * sum_i S_i S_{i+2}     (indices mod n)

with ``J1 > 0`` ferromagnetic and ``J2 >= 0`` antiferromagnetic.  The generic
:class:`IsingModel` uses ``H = sum_i h_i S_i + sum_{i<j} J_ij S_i S_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

MIN_SPINS = 4
MAX_SPINS = 24

__all__ = [
    "MIN_SPINS",
    "MAX_SPINS",
    "SpinConfiguration",
    "AnnniModel",
    "IsingModel",
    "energy",
    "energies",
    "to_ising",
    "as_ising",
    "scale",
    "global_flip",
    "rotate",
    "reflect",
]


def _check_n(n: int) -> int:
    if int(n) != n:
        raise TypeError(f"spin count must be an integer, got {n!r}")
    n = int(n)
    if not MIN_SPINS <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in [{MIN_SPINS}, {MAX_SPINS}], got {n}")
    return n


@dataclass(frozen=True)
class SpinConfiguration:
    """One assignment of ``n`` spins, stored as a bit-packed index."""

    index: int
    n: int

    def __post_init__(self):
        n = _check_n(self.n)
        index = int(self.index)
        if not 0 <= index < (1 << n):
            raise ValueError(f"index {self.index} out of range for n={n}")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinConfiguration":
        spins = list(spins)
        index = 0
        for i, s in enumerate(spins):
            if s == 1:
                index |= 1 << i
            elif s != -1:
                raise ValueError(f"spin values must be -1 or +1, got {s!r} at site {i}")
        return cls(index, len(spins))

    @classmethod
    def all_up(cls, n: int) -> "SpinConfiguration":
        return cls((1 << n) - 1, n)

    @classmethod
    def all_down(cls, n: int) -> "SpinConfiguration":
        return cls(0, n)

    @property
    def spins(self) -> np.ndarray:
        bits = (self.index >> np.arange(self.n)) & 1
        return (2 * bits - 1).astype(np.int8)

    def __str__(self) -> str:
        return "".join("↑" if (self.index >> i) & 1 else "↓" for i in range(self.n))


def global_flip(c: SpinConfiguration) -> SpinConfiguration:
    return SpinConfiguration(((1 << c.n) - 1) ^ c.index, c.n)


def rotate(c: SpinConfiguration, k: int = 1) -> SpinConfiguration:
    """Translate every spin ``k`` sites along the ring (site ``i`` -> ``i + k``)."""
    n = c.n
    k %= n
    mask = (1 << n) - 1
    return SpinConfiguration(((c.index << k) | (c.index >> (n - k))) & mask, n)


def reflect(c: SpinConfiguration) -> SpinConfiguration:
    """Reverse site order: site ``i`` -> ``n - 1 - i``."""
    index = 0
    for i in range(c.n):
        if (c.index >> i) & 1:
            index |= 1 << (c.n - 1 - i)
    return SpinConfiguration(index, c.n)


@dataclass(frozen=True)
class AnnniModel:
    """Periodic 1D ANNNI ring with no local fields."""

    n: int
    j2: float
    j1: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        j1, j2 = float(self.j1), float(self.j2)
        if not (math.isfinite(j1) and j1 > 0):
            raise ValueError(f"j1 must be finite and > 0, got {self.j1}")
        if not (math.isfinite(j2) and j2 >= 0):
            raise ValueError(f"j2 must be finite and >= 0, got {self.j2}")
        object.__setattr__(self, "j1", j1)
        object.__setattr__(self, "j2", j2)


Pair = tuple[int, int]


def _canonical_pair(i: int, j: int) -> Pair:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class IsingModel:
    """Generic Ising Hamiltonian ``sum h_i S_i + sum J_ij S_i S_j``.

    ``fields`` maps site -> h and ``couplings`` maps an ordered pair
    ``(i, j)`` with ``i < j`` -> J.  Both are stored as sorted tuples so the
    model is hashable and immutable.
    """

    n: int
    fields: tuple[tuple[int, float], ...] = ()
    couplings: tuple[tuple[Pair, float], ...] = field(default=())

    def __post_init__(self):
        n = _check_n(self.n)
        object.__setattr__(self, "n", n)
        fields: dict[int, float] = {}
        for site, value in (self.fields.items() if isinstance(self.fields, Mapping) else self.fields):
            site = int(site)
            if not 0 <= site < n:
                raise ValueError(f"field site {site} out of range")
            if site in fields:
                raise ValueError(f"duplicate field on site {site}")
            fields[site] = float(value)
        items = list(self.couplings.items() if isinstance(self.couplings, Mapping) else self.couplings)
        couplings: dict[Pair, float] = {}
        for (i, j), value in items:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-coupling on site {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"coupling ({i}, {j}) out of range")
            pair = _canonical_pair(i, j)
            if pair in couplings:
                raise ValueError(f"duplicate coupling {pair}")
            couplings[pair] = float(value)
        object.__setattr__(self, "fields", tuple(sorted(fields.items())))
        object.__setattr__(self, "couplings", tuple(sorted(couplings.items())))

    @classmethod
    def from_dicts(cls, n: int, h: Mapping[int, float] | None = None,
                   J: Mapping[Pair, float] | None = None) -> "IsingModel":
        return cls(n, tuple((h or {}).items()), tuple((J or {}).items()))

    @property
    def h(self) -> dict[int, float]:
        return dict(self.fields)

    @property
    def J(self) -> dict[Pair, float]:
        return dict(self.couplings)


Model = Union[AnnniModel, IsingModel]


def to_ising(model: AnnniModel) -> IsingModel:
    """Explicit couplings ``J_{i,i+1} = -J1`` and ``J_{i,i+2} = +J2``.

    Pairs that coincide on small rings (n = 4) are merged by summing their
    coefficients; zero-valued couplings are dropped.
    """
    n = model.n
    couplings: dict[Pair, float] = {}
    for i in range(n):
        for offset, value in ((1, -model.j1), (2, model.j2)):
            pair = _canonical_pair(i, (i + offset) % n)
            couplings[pair] = couplings.get(pair, 0.0) + value
    return IsingModel(n, (), tuple((p, v) for p, v in couplings.items() if v != 0.0))


def scale(model: Model, factor: float) -> IsingModel:
    """Multiply every field and coupling by ``factor`` (the overall energy scale)."""
    factor = float(factor)
    if not (math.isfinite(factor) and factor > 0):
        raise ValueError(f"scale factor must be finite and > 0, got {factor}")
    if isinstance(model, AnnniModel):
        model = to_ising(model)
    return IsingModel(
        model.n,
        tuple((i, v * factor) for i, v in model.fields),
        tuple((p, v * factor) for p, v in model.couplings),
    )


def energy(model: Model, c: SpinConfiguration | Iterable[int]) -> float:
    """Energy of one configuration, evaluated term by term."""
    if not isinstance(c, SpinConfiguration):
        c = SpinConfiguration.from_spins(c)
    if c.n != model.n:
        raise ValueError(f"configuration has {c.n} spins, model has {model.n}")
    s = [2 * ((c.index >> i) & 1) - 1 for i in range(c.n)]
    n = model.n
    if isinstance(model, AnnniModel):
        nn = sum(s[i] * s[(i + 1) % n] for i in range(n))
        nnn = sum(s[i] * s[(i + 2) % n] for i in range(n))
        return -model.j1 * nn + model.j2 * nnn
    total = 0.0
    for i, h in model.fields:
        total += h * s[i]
    for (i, j), J in model.couplings:
        total += J * s[i] * s[j]
    return total


def energies(model: Model) -> np.ndarray:
    """Energies of all ``2**n`` configurations, ordered by index.

    Each coupling contributes ``J * (1 - 2 * (b_i XOR b_j))`` which is
    evaluated on the whole index range at once.
    """
    if isinstance(model, AnnniModel):
        model = to_ising(model)
    n = model.n
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.float64)
    for i, h in model.fields:
        out += h * (2 * ((idx >> i) & 1) - 1)
    for (i, j), J in model.couplings:
        out += J * (1 - 2 * (((idx >> i) ^ (idx >> j)) & 1))
    return out


def as_ising(model: Model) -> IsingModel:
    return to_ising(model) if isinstance(model, AnnniModel) else model
