"""Total variation distance and effective inverse-temperature fitting.

The fit searches ``beta -> TVD(Gibbs(beta), empirical)`` with three candidate
sources and keeps every evaluated point:

1. derivative-free local minimisers (Nelder-Mead and Powell by default),
   each started from 28 log-spaced values between 1e5 and 1e-8;
2. a 100-point log grid from 1e-3 down to 1e-15;
3. a linear grid ``k * 1e-4`` that stops when the *unshifted* partition sum
   ``sum exp(-beta E)`` is no longer a finite positive double, or at the cap.

A bounded Brent refinement runs around the best few evaluated points.  All
beta and TVD values are rounded to 7 decimals before the minimum and its tie
set are taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import optimize

from .empirical import EmpiricalDistribution
from .gibbs import ENERGY_DECIMALS, boltzmann, energy_table
from .ising import Model

__all__ = [
    "FitResult",
    "FitTrace",
    "tvd",
    "tvd_at_beta",
    "LevelObjective",
    "fit_beta",
    "fit_sweep_cell",
    "WIDE_RANGE",
]

WIDE_RANGE = 0.1
DECIMALS = 7
N_STARTS = 28
START_RANGE = (1e5, 1e-8)
LOG_GRID = (1e-3, 1e-15, 100)
LINEAR_STEP = 1e-4
BETA_CAP = 1e5
MAX_EVALS = 200
TOLERANCE = 1e-10
METHODS = ("Nelder-Mead", "Powell")
N_POLISH = 3
_CHUNK = 1 << 15

Empirical = Union[EmpiricalDistribution, np.ndarray]


def tvd(p, q) -> float:
    """Total variation distance ``0.5 * sum |p - q|`` of two probability vectors."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"probability vectors must be 1D with equal length, got {p.shape} and {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if (v < 0).any() or abs(v.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} is not a normalized probability vector")
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def _as_probabilities(empirical: Empirical, n: int) -> np.ndarray:
    if isinstance(empirical, EmpiricalDistribution):
        if empirical.n != n:
            raise ValueError(f"empirical distribution has {empirical.n} spins, model has {n}")
        return empirical.probabilities()
    q = np.asarray(empirical, dtype=np.float64)
    if q.shape != (1 << n,):
        raise ValueError(f"probability vector must have length 2**{n}")
    return q


def tvd_at_beta(empirical: Empirical, model: Model, beta: float) -> float:
    return tvd(boltzmann(model, beta).probs, _as_probabilities(empirical, model.n))


class LevelObjective:
    """Vectorised ``beta -> TVD`` against a fixed empirical vector.

    Configurations are grouped by energy level.  Within a level the Gibbs
    probability is a single value ``p_l``, so the level's contribution is
    ``(g_l - k_l) p_l + sum_c |p_l - q_c|`` over its ``k_l`` observed
    configurations, which sorted prefix sums give in O(log k_l).
    """

    def __init__(self, model: Model, q: np.ndarray):
        e = energy_table(model)
        rounded = np.round(e, ENERGY_DECIMALS)
        levels, inverse, degeneracy = np.unique(rounded, return_inverse=True, return_counts=True)
        self.levels = levels
        self.shifted = levels - levels[0]
        self.degeneracy = degeneracy.astype(np.float64)
        observed = np.flatnonzero(q > 0)
        lvl = inverse[observed]
        qv = q[observed]
        order = np.lexsort((qv, lvl))
        lvl, qv = lvl[order], qv[order]
        self._keys = 2.0 * lvl + qv
        self._cum = np.concatenate(([0.0], np.cumsum(qv)))
        L = len(levels)
        self._start = np.searchsorted(lvl, np.arange(L), side="left")
        self._stop = np.searchsorted(lvl, np.arange(L), side="right")
        self._unobserved = self.degeneracy - (self._stop - self._start)
        self._offset = 2.0 * np.arange(L)

    def __call__(self, betas) -> np.ndarray:
        betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
        w = np.exp(-np.outer(betas, self.shifted))
        p = w / (w @ self.degeneracy)[:, None]
        j = np.searchsorted(self._keys, p + self._offset)
        j = np.clip(j, self._start, self._stop)
        cum = self._cum
        below = (j - self._start) * p - (cum[j] - cum[self._start])
        above = (cum[self._stop] - cum[j]) - (self._stop - j) * p
        total = (self._unobserved * p + below + above).sum(axis=1)
        return np.clip(0.5 * total, 0.0, 1.0)

    def scalar(self, beta: float) -> float:
        return float(self(beta)[0])

    def unshifted_ok(self, betas: np.ndarray) -> np.ndarray:
        """Whether ``sum exp(-beta E)`` is a finite positive double at each beta."""
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            z = np.exp(-np.outer(betas, self.levels)) @ self.degeneracy
        return np.isfinite(z) & (z > 0)


@dataclass(frozen=True)
class FitTrace:
    """Instrumentation counters for one fit."""

    starts: tuple[float, ...]
    methods: tuple[str, ...]
    local_runs: int
    local_evaluations: int
    log_grid_points: int
    linear_grid_points: int
    linear_grid_last: float
    linear_stop_reason: str
    polish_runs: int
    evaluations: int


@dataclass(frozen=True)
class FitResult:
    tvd_min: float
    beta_best: float
    beta_lo: float
    beta_hi: float
    wide_range: bool
    total_samples: int | None = None
    trace: FitTrace | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.beta_lo <= self.beta_best <= self.beta_hi:
            raise ValueError("beta_best must lie in [beta_lo, beta_hi]")

    @property
    def beta_range(self) -> tuple[float, float]:
        return (self.beta_lo, self.beta_hi)


class _Recorder:
    def __init__(self, objective: LevelObjective, cap: float):
        self.objective = objective
        self.cap = cap
        self.betas: list[np.ndarray] = []
        self.values: list[np.ndarray] = []
        self.count = 0

    def batch(self, betas: np.ndarray) -> np.ndarray:
        betas = np.asarray(betas, dtype=np.float64)
        values = self.objective(betas)
        self.betas.append(betas)
        self.values.append(values)
        self.count += len(betas)
        return values

    def scalar(self, x) -> float:
        beta = float(np.clip(np.ravel(x)[0], 0.0, self.cap))
        return float(self.batch(np.array([beta]))[0])

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.concatenate(self.betas), np.concatenate(self.values)


def _local_search(rec: _Recorder, method: str, start: float, maxfev: int, tol: float) -> None:
    bounds = [(0.0, rec.cap)]
    if method == "Nelder-Mead":
        options = {"maxfev": maxfev, "xatol": tol, "fatol": tol}
    elif method == "Powell":
        options = {"maxfev": maxfev, "xtol": tol, "ftol": tol}
    elif method == "COBYLA":
        options = {"maxiter": maxfev, "rhobeg": max(start * 0.05, 1e-8)}
        optimize.minimize(rec.scalar, [start], method=method, tol=tol, options=options)
        return
    else:
        raise ValueError(f"unsupported derivative-free method {method!r}")
    optimize.minimize(rec.scalar, [start], method=method, bounds=bounds, options=options)


def _linear_grid(rec: _Recorder, step: float, cap: float) -> tuple[int, float, str]:
    count = 0
    last = 0.0
    k = 1
    kmax = int(math.floor(cap / step))
    while k <= kmax:
        ks = np.arange(k, min(k + _CHUNK, kmax + 1), dtype=np.float64)
        betas = ks * step
        ok = rec.objective.unshifted_ok(betas)
        if not ok.all():
            bad = int(np.argmin(ok))
            if bad:
                rec.batch(betas[:bad])
                count += bad
                last = float(betas[bad - 1])
            return count, last, "overflow"
        rec.batch(betas)
        count += len(betas)
        last = float(betas[-1])
        k += len(betas)
    return count, last, "cap"


def _polish(rec: _Recorder, n_best: int, tol: float) -> int:
    betas, values = rec.arrays()
    uniq, first = np.unique(betas, return_index=True)
    vals = values[first]
    runs = 0
    for i in np.argsort(vals, kind="stable")[:n_best]:
        lo = uniq[i - 1] if i > 0 else 0.0
        hi = uniq[i + 1] if i + 1 < len(uniq) else min(rec.cap, uniq[i] * 2 + tol)
        if hi <= lo:
            continue
        optimize.minimize_scalar(rec.scalar, bounds=(lo, hi), method="bounded",
                                 options={"xatol": tol, "maxiter": MAX_EVALS})
        runs += 1
    return runs


def fit_beta(
    empirical: Empirical,
    model: Model,
    *,
    decimals: int = DECIMALS,
    n_starts: int = N_STARTS,
    methods: Sequence[str] = METHODS,
    max_evals: int = MAX_EVALS,
    tol: float = TOLERANCE,
    linear_step: float = LINEAR_STEP,
    beta_cap: float = BETA_CAP,
) -> FitResult:
    """Fit the inverse temperature whose Gibbs distribution is closest in TVD.

    ``empirical`` is an :class:`EmpiricalDistribution` or a dense probability
    vector over all ``2**n`` configurations.  Returns the minimum rounded TVD,
    the beta achieving it and the range of all betas tied with it.
    """
    q = _as_probabilities(empirical, model.n)
    if abs(q.sum() - 1.0) > 1e-9 or (q < 0).any():
        raise ValueError("empirical input is not a normalized distribution")
    total = empirical.total if isinstance(empirical, EmpiricalDistribution) else None
    if len(methods) < 2:
        raise ValueError("at least two derivative-free methods are required")

    rec = _Recorder(LevelObjective(model, q), beta_cap)
    starts = np.logspace(math.log10(START_RANGE[0]), math.log10(START_RANGE[1]), n_starts)
    for method in methods:
        for b0 in starts:
            _local_search(rec, method, min(float(b0), beta_cap), max_evals, tol)
    local_evals = rec.count

    lo_exp, hi_exp, points = LOG_GRID
    rec.batch(np.logspace(math.log10(lo_exp), math.log10(hi_exp), points))
    n_linear, last, reason = _linear_grid(rec, linear_step, beta_cap)
    polish_runs = _polish(rec, N_POLISH, tol)

    betas, values = rec.arrays()
    rb = np.round(betas, decimals)
    rv = np.round(values, decimals)
    tvd_min = float(rv.min())
    tie = np.flatnonzero(rv == tvd_min)
    best = tie[np.lexsort((rb[tie], values[tie]))[0]]
    beta_lo, beta_hi = float(rb[tie].min()), float(rb[tie].max())
    trace = FitTrace(
        starts=tuple(float(s) for s in starts),
        methods=tuple(methods),
        local_runs=len(methods) * n_starts,
        local_evaluations=local_evals,
        log_grid_points=points,
        linear_grid_points=n_linear,
        linear_grid_last=last,
        linear_stop_reason=reason,
        polish_runs=polish_runs,
        evaluations=rec.count,
    )
    return FitResult(
        tvd_min=tvd_min,
        beta_best=float(rb[best]),
        beta_lo=beta_lo,
        beta_hi=beta_hi,
        wide_range=bool(beta_hi - beta_lo > WIDE_RANGE),
        total_samples=total,
        trace=trace,
    )


def fit_sweep_cell(samples, model: Model, **kwargs) -> FitResult:
    """Fit one sweep cell given samples in any accepted form.

    ``samples`` may be an :class:`EmpiricalDistribution`, a path to a samples
    text file, a 1D array of configuration indices or an ``(m, n)`` +/-1 array.
    """
    from .sampling import ingest_samples

    if isinstance(samples, (str, Path)):
        samples = ingest_samples(samples, model.n)
    elif not isinstance(samples, EmpiricalDistribution):
        arr = np.asarray(samples)
        if arr.size == 0:
            raise ValueError("sweep cell has no samples")
        if arr.ndim == 2:
            samples = EmpiricalDistribution.from_spins(arr)
        else:
            samples = EmpiricalDistribution.from_indices(model.n, arr)
    return fit_beta(samples, model, **kwargs)
