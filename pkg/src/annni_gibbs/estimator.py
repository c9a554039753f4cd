"""Scikit-learn style front end for effective-temperature estimation."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_spin_array, indices_to_spins, spins_to_indices
from .empirical import EmpiricalDistribution
from .fitting import DECIMALS, METHODS, N_STARTS, fit_beta, tvd
from .gibbs import boltzmann, sample_exact
from .ising import AnnniModel

__all__ = ["BoltzmannTemperatureEstimator"]


class BoltzmannTemperatureEstimator(BaseEstimator):
    """Estimate the inverse temperature at which samples look Boltzmann.

    Parameters
    ----------
    j2 : float
        Antiferromagnetic next-nearest-neighbour strength of the ANNNI ring.
    j1 : float
        Ferromagnetic nearest-neighbour strength.
    model : AnnniModel or IsingModel, optional
        Explicit model to fit against; overrides ``j1``/``j2``.
    decimals, n_starts, methods
        Fitting protocol settings, see :func:`annni_gibbs.fitting.fit_beta`.

    Attributes
    ----------
    beta_ : float
        Best-fit inverse temperature.
    tvd_ : float
        Total variation distance at ``beta_`` (rounded).
    beta_range_ : tuple of float
        All betas tied with the minimum TVD.
    wide_range_ : bool
        Whether ``beta_range_`` spans more than 0.1.
    fit_result_ : FitResult
    model_ : the model fitted against
    n_features_in_ : int
    """

    def __init__(self, j2=1.0, j1=1.0, model=None, decimals=DECIMALS, n_starts=N_STARTS, methods=METHODS):
        self.j2 = j2
        self.j1 = j1
        self.model = model
        self.decimals = decimals
        self.n_starts = n_starts
        self.methods = methods

    def _make_model(self, n):
        if self.model is not None:
            if self.model.n != n:
                raise ValueError(f"model has {self.model.n} spins, samples have {n}")
            return self.model
        return AnnniModel(n, self.j2, self.j1)

    def fit(self, X, y=None):
        """Fit from an ``(n_samples, n_spins)`` array of spins."""
        spins = check_spin_array(X)
        emp = EmpiricalDistribution.from_indices(spins.shape[1], spins_to_indices(spins))
        return self.fit_distribution(emp)

    def fit_distribution(self, empirical: EmpiricalDistribution):
        self.model_ = self._make_model(empirical.n)
        self.n_features_in_ = empirical.n
        result = fit_beta(empirical, self.model_, decimals=self.decimals,
                          n_starts=self.n_starts, methods=tuple(self.methods))
        self.fit_result_ = result
        self.beta_ = result.beta_best
        self.tvd_ = result.tvd_min
        self.beta_range_ = result.beta_range
        self.wide_range_ = result.wide_range
        return self

    def predict_proba(self, X):
        """Gibbs probability of each sample at the fitted ``beta_``."""
        check_is_fitted(self)
        spins = check_spin_array(X, self.n_features_in_)
        return boltzmann(self.model_, self.beta_).probs[spins_to_indices(spins)]

    def score(self, X, y=None):
        """Negative TVD between the samples in ``X`` and Gibbs at ``beta_``."""
        check_is_fitted(self)
        spins = check_spin_array(X, self.n_features_in_)
        q = EmpiricalDistribution.from_indices(self.n_features_in_, spins_to_indices(spins)).probabilities()
        return -tvd(boltzmann(self.model_, self.beta_).probs, q)

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self)
        emp = sample_exact(self.model_, self.beta_, n_samples, seed=random_state)
        spins = indices_to_spins(emp.expand(), self.n_features_in_)
        np.random.default_rng(random_state).shuffle(spins)
        return spins
