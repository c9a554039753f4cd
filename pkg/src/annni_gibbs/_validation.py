"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_array

from .ising import MAX_SPINS, MIN_SPINS


def check_spin_array(X, n_spins: int | None = None) -> np.ndarray:
    """Validate a ``(samples, sites)`` spin array and return it as +/-1 int8.

    Accepts either the +/-1 or the 0/1 encoding.  An array that contains both
    ``-1`` and ``0`` is ambiguous and rejected.
    """
    X = check_array(X, dtype=None, ensure_2d=True, ensure_min_samples=1)
    if not np.issubdtype(X.dtype, np.number):
        raise ValueError("spin array must be numeric")
    values = set(np.unique(X).tolist())
    if not values <= {-1, 0, 1}:
        raise ValueError(f"spin values must be in {{-1, 1}} or {{0, 1}}, got {sorted(values)}")
    if -1 in values and 0 in values:
        raise ValueError("spin array mixes 0/1 and -1/+1 encodings")
    if n_spins is not None and X.shape[1] != n_spins:
        raise ValueError(f"expected {n_spins} spins per sample, got {X.shape[1]}")
    if not MIN_SPINS <= X.shape[1] <= MAX_SPINS:
        raise ValueError(f"spin count must be in [{MIN_SPINS}, {MAX_SPINS}], got {X.shape[1]}")
    return np.where(X > 0, 1, -1).astype(np.int8)


def spins_to_indices(spins: np.ndarray) -> np.ndarray:
    weights = np.int64(1) << np.arange(spins.shape[1], dtype=np.int64)
    return (spins > 0).astype(np.int64) @ weights


def indices_to_spins(indices: np.ndarray, n: int) -> np.ndarray:
    bits = (np.asarray(indices, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


def check_beta(beta) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return beta
