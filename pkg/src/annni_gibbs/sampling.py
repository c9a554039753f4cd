"""Sample sources: reference classical samplers, readout-noise wrapper, and
ingestion of external sample files (including parallel-embedding exports).

Generative samplers return :class:`EmpiricalDistribution` objects and are
deterministic given ``seed``.  The estimator-style classes at the bottom wrap
the functions with ``get_params``/``set_params`` so sweeps can clone them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numba
import numpy as np
from sklearn.base import BaseEstimator

from .empirical import EmpiricalDistribution
from .gibbs import sample_exact
from .ising import Model, as_ising

__all__ = [
    "metropolis_sample",
    "apply_flip_noise",
    "ingest_samples",
    "write_samples",
    "split_parallel_embeddings",
    "SamplerSpec",
    "ExactGibbsSampler",
    "MetropolisSampler",
    "FlipNoiseSampler",
    "FileSampler",
]

_ALWAYS = 2.0**32
_TABLE_MAX_DEGREE = 12


# -- Metropolis kernels -------------------------------------------------------

@numba.njit(inline="always")
def _splitmix64(state):
    z = state + numba.uint64(0x9E3779B97F4A7C15)
    x = z
    x = (x ^ (x >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    return z, x ^ (x >> numba.uint64(31))


@numba.njit(cache=True)
def _metropolis_table(chain_seeds, n, sweeps, nbrs, deg, thresholds, out):
    # thresholds[i, pattern]: acceptance threshold on a uniform 32-bit integer;
    # pattern bit 0 is spin i, bit k+1 is neighbour k of spin i
    # a sweep is n proposals at uniformly random sites; a fixed scan order
    # lets zero-cost domain-wall moves drift rigidly and never annihilate
    mask = numba.uint64((1 << n) - 1)
    un = numba.uint64(n)
    low = numba.uint64(0xFFFFFFFF)
    for c in range(chain_seeds.shape[0]):
        st = chain_seeds[c]
        st, r = _splitmix64(st)
        s = np.int64(r & mask)
        for _ in range(sweeps * n):
            st, r = _splitmix64(st)
            i = np.int64(((r >> numba.uint64(32)) * un) >> numba.uint64(32))
            pat = (s >> i) & 1
            for k in range(deg[i]):
                pat |= ((s >> nbrs[i, k]) & 1) << (k + 1)
            # the low 32 bits of the draw that picked the site decide acceptance
            if (r & low) < thresholds[i, pat]:
                s ^= np.int64(1) << i
        out[c] = s


@numba.njit(cache=True)
def _metropolis_direct(chain_seeds, n, sweeps, beta, h, nbrs, coup, deg, out):
    # a sweep is n proposals at uniformly random sites; a fixed scan order
    # lets zero-cost domain-wall moves drift rigidly and never annihilate
    mask = numba.uint64((1 << n) - 1)
    un = numba.uint64(n)
    for c in range(chain_seeds.shape[0]):
        st = chain_seeds[c]
        st, r = _splitmix64(st)
        s = np.int64(r & mask)
        for _ in range(sweeps * n):
            st, r = _splitmix64(st)
            i = np.int64(((r >> numba.uint64(32)) * un) >> numba.uint64(32))
            f = h[i]
            for k in range(deg[i]):
                f += coup[i, k] * (2.0 * ((s >> nbrs[i, k]) & 1) - 1.0)
            si = 2.0 * ((s >> i) & 1) - 1.0
            delta = -2.0 * si * f
            if delta <= 0.0:
                s ^= np.int64(1) << i
            else:
                st, r = _splitmix64(st)
                u = (r >> numba.uint64(11)) * (1.0 / 9007199254740992.0)
                if u < math.exp(-beta * delta):
                    s ^= np.int64(1) << i
        out[c] = s


def _adjacency(model: Model):
    ising = as_ising(model)
    n = ising.n
    nb: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), J in ising.couplings:
        nb[i].append((j, J))
        nb[j].append((i, J))
    width = max(1, max(len(x) for x in nb))
    nbrs = np.zeros((n, width), dtype=np.int64)
    coup = np.zeros((n, width), dtype=np.float64)
    deg = np.array([len(x) for x in nb], dtype=np.int64)
    for i, row in enumerate(nb):
        for k, (j, J) in enumerate(row):
            nbrs[i, k] = j
            coup[i, k] = J
    h = np.zeros(n, dtype=np.float64)
    for i, v in ising.fields:
        h[i] = v
    return h, nbrs, coup, deg


def _threshold_table(beta: float, h, coup, deg) -> np.ndarray:
    n, width = coup.shape
    table = np.zeros((n, 1 << (width + 1)), dtype=np.uint64)
    for i in range(n):
        d = int(deg[i])
        pats = np.arange(1 << (d + 1))
        spins = 2 * ((pats[:, None] >> np.arange(d + 1)) & 1) - 1
        field_ = h[i] + spins[:, 1:] @ coup[i, :d]
        delta = -2.0 * spins[:, 0] * field_
        with np.errstate(over="ignore"):
            accept = np.exp(-beta * np.maximum(delta, 0.0))
        row = np.where(accept >= 1.0, _ALWAYS, np.floor(accept * 2.0**32)).astype(np.uint64)
        table[i, : len(pats)] = row
    return table


def _check_count(m) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"sample count must be a positive integer, got {m}")
    return int(m)


def metropolis_sample(model: Model, beta_sim: float, sweeps: int, m: int, seed=None) -> EmpiricalDistribution:
    """Run ``m`` independent single-spin-flip Metropolis chains.

    Each chain starts from a uniformly random configuration, performs
    ``sweeps`` sweeps of ``n`` single-spin-flip proposals at uniformly random
    sites (acceptance ``min(1, exp(-beta_sim * dE))``) and contributes its final state.  Chain
    ``c`` draws from its own stream seeded by word ``c`` of the seed sequence,
    so results do not depend on how chains are scheduled.
    """
    m = _check_count(m)
    beta_sim = float(beta_sim)
    if not math.isfinite(beta_sim) or beta_sim < 0:
        raise ValueError(f"beta_sim must be finite and >= 0, got {beta_sim}")
    if int(sweeps) != sweeps or sweeps < 0:
        raise ValueError(f"sweeps must be a non-negative integer, got {sweeps}")
    h, nbrs, coup, deg = _adjacency(model)
    chain_seeds = np.random.SeedSequence(seed).generate_state(m, dtype=np.uint64)
    out = np.empty(m, dtype=np.int64)
    if int(deg.max()) <= _TABLE_MAX_DEGREE:
        table = _threshold_table(beta_sim, h, coup, deg)
        _metropolis_table(chain_seeds, model.n, int(sweeps), nbrs, deg, table, out)
    else:
        _metropolis_direct(chain_seeds, model.n, int(sweeps), beta_sim, h, nbrs, coup, deg, out)
    return EmpiricalDistribution.from_indices(model.n, out)


def apply_flip_noise(dist: EmpiricalDistribution, p: float, seed=None) -> EmpiricalDistribution:
    """Flip every spin of every recorded sample independently with probability ``p``."""
    p = float(p)
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"flip probability must be in [0, 0.5], got {p}")
    if p == 0.0:
        return dist
    rng = np.random.default_rng(seed)
    samples = dist.expand()
    weights = np.int64(1) << np.arange(dist.n, dtype=np.int64)
    out = np.empty_like(samples)
    chunk = 1 << 18
    for start in range(0, len(samples), chunk):
        block = samples[start:start + chunk]
        flips = (rng.random((len(block), dist.n)) < p).astype(np.int64) @ weights
        out[start:start + chunk] = block ^ flips
    return EmpiricalDistribution.from_indices(dist.n, out)


# -- sample files -------------------------------------------------------------

def ingest_samples(path: str | Path, n: int) -> EmpiricalDistribution:
    """Read a samples text file: one configuration per line, ``n`` tokens.

    Tokens are either all in {-1, 1} or all in {0, 1} across the file; a file
    mixing ``-1`` and ``0`` is rejected.  Lines starting with ``#`` and blank
    lines are skipped.
    """
    rows: list[list[int]] = []
    seen: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split()
            if len(tokens) != n:
                raise ValueError(f"{path}:{lineno}: expected {n} spins, got {len(tokens)}")
            try:
                values = [int(t) for t in tokens]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer token in {text!r}") from None
            bad = set(values) - {-1, 0, 1}
            if bad:
                raise ValueError(f"{path}:{lineno}: invalid spin values {sorted(bad)}")
            seen.update(values)
            if -1 in seen and 0 in seen:
                raise ValueError(f"{path}:{lineno}: file mixes 0/1 and -1/+1 encodings")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no samples")
    bits = (np.asarray(rows, dtype=np.int64) > 0).astype(np.int64)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    return EmpiricalDistribution.from_indices(n, bits @ weights)


def write_samples(dist: EmpiricalDistribution, path: str | Path, header: str | None = None) -> None:
    """Write one +/-1 line per sample, indices ascending."""
    shifts = np.arange(dist.n)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for index, count in dist.counts:
            line = " ".join(str(2 * ((index >> s) & 1) - 1) for s in shifts) + "\n"
            fh.write(line * count)


def _normalize_embeddings(embeddings) -> list[dict[int, Any]]:
    out = []
    for k, emb in enumerate(embeddings):
        pairs = emb.items() if isinstance(emb, Mapping) else emb
        mapping: dict[int, Any] = {}
        for logical, physical in pairs:
            logical = int(logical)
            if logical in mapping:
                raise ValueError(f"embedding {k}: logical site {logical} mapped twice")
            mapping[logical] = physical
        if len(set(map(str, mapping.values()))) != len(mapping):
            raise ValueError(f"embedding {k} is not injective")
        out.append(mapping)
    return out


def split_parallel_embeddings(raw_path: str | Path, embeddings: Sequence, exclude: Iterable[int] = ()) -> EmpiricalDistribution:
    """Turn a raw hardware readout CSV into pooled logical samples.

    The CSV header holds physical column ids; each row is one anneal-readout
    cycle with a +/-1 value per column.  Every embedding (logical site ->
    physical column) yields one logical sample per row; all embeddings are
    pooled with equal weight.  ``exclude`` lists embedding positions to drop
    (e.g. embeddings broken by inactive qubits).
    """
    maps = _normalize_embeddings(embeddings)
    if not maps:
        raise ValueError("no embeddings given")
    n = len(maps[0])
    owner: dict[str, int] = {}
    for k, mp in enumerate(maps):
        if sorted(mp) != list(range(len(mp))) or len(mp) != n:
            raise ValueError(f"embedding {k} must map logical sites 0..{n - 1}")
        for phys in mp.values():
            key = str(phys)
            if key in owner:
                raise ValueError(f"embeddings {owner[key]} and {k} overlap on physical column {phys}")
            owner[key] = k
    skip = set(int(k) for k in exclude)
    active = [mp for k, mp in enumerate(maps) if k not in skip]
    if not active:
        raise ValueError("every embedding was excluded")

    with open(raw_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{raw_path}: empty readout file") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]
    column = {h: i for i, h in enumerate(header)}
    missing = sorted({str(p) for mp in active for p in mp.values()} - set(column), key=str)
    if missing:
        raise ValueError(f"{raw_path}: physical columns missing from header: {missing[:10]}")
    if not rows:
        raise ValueError(f"{raw_path}: no readout rows")
    try:
        data = np.asarray([[int(float(c)) for c in r] for r in rows], dtype=np.int64)
    except ValueError:
        raise ValueError(f"{raw_path}: non-numeric readout value") from None
    if data.shape[1] != len(header):
        raise ValueError(f"{raw_path}: ragged rows")

    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    indices = []
    for mp in active:
        cols = [column[str(mp[i])] for i in range(n)]
        block = data[:, cols]
        if not np.isin(block, (-1, 1)).all():
            raise ValueError(f"{raw_path}: readout values must be -1 or +1")
        indices.append((block > 0).astype(np.int64) @ weights)
    return EmpiricalDistribution.from_indices(n, np.concatenate(indices))


# -- estimator-style samplers -------------------------------------------------

class ExactGibbsSampler(BaseEstimator):
    """Draw i.i.d. samples from the exact Boltzmann distribution."""

    def __init__(self, beta=1.0, random_state=None):
        self.beta = beta
        self.random_state = random_state

    def sample(self, model, n_samples):
        return sample_exact(model, self.beta, n_samples, seed=self.random_state)


class MetropolisSampler(BaseEstimator):
    """Independent Metropolis chains; ``sweeps`` plays the annealing-time role."""

    def __init__(self, beta=1.0, sweeps=1000, random_state=None):
        self.beta = beta
        self.sweeps = sweeps
        self.random_state = random_state

    def sample(self, model, n_samples):
        return metropolis_sample(model, self.beta, self.sweeps, n_samples, seed=self.random_state)


class FlipNoiseSampler(BaseEstimator):
    """Wrap another sampler and corrupt its output with independent spin flips."""

    def __init__(self, base=None, p=0.0, random_state=None):
        self.base = base
        self.p = p
        self.random_state = random_state

    def sample(self, model, n_samples):
        base = self.base if self.base is not None else ExactGibbsSampler(random_state=self.random_state)
        seeds = np.random.SeedSequence(self.random_state).spawn(1)[0]
        return apply_flip_noise(base.sample(model, n_samples), self.p, seed=seeds)


class FileSampler(BaseEstimator):
    """Serve samples from a samples text file; ``n_samples`` is ignored."""

    def __init__(self, path=None):
        self.path = path

    def sample(self, model, n_samples=None):
        if self.path is None:
            raise ValueError("FileSampler needs a path")
        return ingest_samples(self.path, model.n)


_KINDS = {
    "exact-gibbs": ExactGibbsSampler,
    "metropolis": MetropolisSampler,
    "noisy-wrapper": FlipNoiseSampler,
    "file": FileSampler,
}


@dataclass(frozen=True)
class SamplerSpec:
    """Declarative sampler description: ``kind`` plus kind-specific parameters.

    ``exact-gibbs``: beta.  ``metropolis``: beta, sweeps.  ``noisy-wrapper``:
    beta (of the wrapped exact sampler) and p.  ``file``: path.
    """

    kind: str
    parameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        params = dict(self.parameters)
        allowed = {
            "exact-gibbs": {"beta"},
            "metropolis": {"beta", "sweeps"},
            "noisy-wrapper": {"beta", "p"},
            "file": {"path"},
        }[self.kind]
        extra = set(params) - allowed
        if extra:
            raise ValueError(f"unexpected parameters for {self.kind}: {sorted(extra)}")
        beta = params.get("beta", 1.0)
        if not (math.isfinite(float(beta)) and float(beta) >= 0):
            raise ValueError(f"beta must be finite and >= 0, got {beta}")
        if "sweeps" in params and (int(params["sweeps"]) != params["sweeps"] or params["sweeps"] < 0):
            raise ValueError(f"sweeps must be a non-negative integer, got {params['sweeps']}")
        if "p" in params and not 0.0 <= float(params["p"]) <= 0.5:
            raise ValueError(f"p must be in [0, 0.5], got {params['p']}")
        if self.kind == "file" and not params.get("path"):
            raise ValueError("file sampler needs a path")
        object.__setattr__(self, "parameters", params)

    def build(self) -> BaseEstimator:
        params = dict(self.parameters)
        if self.kind == "file":
            return FileSampler(params["path"])
        if self.kind == "noisy-wrapper":
            base = ExactGibbsSampler(beta=params.get("beta", 1.0), random_state=self.seed)
            return FlipNoiseSampler(base=base, p=params.get("p", 0.0), random_state=self.seed)
        return _KINDS[self.kind](**params, random_state=self.seed)
