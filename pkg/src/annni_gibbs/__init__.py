"""Exact Boltzmann sampling diagnostics for frustrated J1-J2 (ANNNI) Ising rings."""

from .embedding import (
    HostGraph,
    PatternGraph,
    SearchBudgetExhausted,
    circulant,
    find_disjoint_embeddings,
    find_embedding,
)
from .empirical import EmpiricalDistribution
from .estimator import BoltzmannTemperatureEstimator
from .fitting import FitResult, fit_beta, fit_sweep_cell, tvd, tvd_at_beta
from .gibbs import GibbsDistribution, Spectrum, boltzmann, ground_states, sample_exact, spectrum
from .harness import CellResult, SweepConfig, best_overall, emit_outputs, reduce_min_tvd, run_sweep
from .ising import AnnniModel, IsingModel, SpinConfiguration, energy, scale, to_ising
from .sampling import (
    ExactGibbsSampler,
    FlipNoiseSampler,
    MetropolisSampler,
    SamplerSpec,
    apply_flip_noise,
    ingest_samples,
    metropolis_sample,
    split_parallel_embeddings,
)

__all__ = [
    "HostGraph",
    "PatternGraph",
    "SearchBudgetExhausted",
    "circulant",
    "find_disjoint_embeddings",
    "find_embedding",
    "EmpiricalDistribution",
    "BoltzmannTemperatureEstimator",
    "FitResult",
    "fit_beta",
    "fit_sweep_cell",
    "tvd",
    "tvd_at_beta",
    "GibbsDistribution",
    "Spectrum",
    "boltzmann",
    "ground_states",
    "sample_exact",
    "spectrum",
    "CellResult",
    "SweepConfig",
    "best_overall",
    "emit_outputs",
    "reduce_min_tvd",
    "run_sweep",
    "AnnniModel",
    "IsingModel",
    "SpinConfiguration",
    "energy",
    "scale",
    "to_ising",
    "ExactGibbsSampler",
    "FlipNoiseSampler",
    "MetropolisSampler",
    "SamplerSpec",
    "apply_flip_noise",
    "ingest_samples",
    "metropolis_sample",
    "split_parallel_embeddings",
]

__version__ = "0.1.0"
