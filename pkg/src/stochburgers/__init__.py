"""Stochastic Burgers and linear heat equations driven by boundary, point and body noise.

Spectral Galerkin simulation on an interval, exact Ornstein-Uhlenbeck
sampling of the linear problems, closed-form oracles for their statistics,
and Monte Carlo diagnostics for ensembles.
"""

from .spectral import (DIRICHLET, NEUMANN, ConfigurationError, Domain, SpectralBasis,
                       SpectralField, build_basis, evaluate_field, neumann_map,
                       semigroup_apply)
from .noise import NoiseSpec, RngStream
from .linear import EnsembleRun, simulate_linear, simulate_linear_ensemble
from .burgers import (IntegrationError, SolverConfig, cole_hopf_reference, simulate_burgers,
                      simulate_burgers_ensemble)
from .diagnostics import (EnsembleResult, ScalingFit, ensemble_correlation,
                          ensemble_mean_energy, fit_power_law)
from .config import RunConfig, load_config

__all__ = [
    "DIRICHLET",
    "NEUMANN",
    "ConfigurationError",
    "Domain",
    "SpectralBasis",
    "SpectralField",
    "build_basis",
    "evaluate_field",
    "neumann_map",
    "semigroup_apply",
    "NoiseSpec",
    "RngStream",
    "EnsembleRun",
    "simulate_linear",
    "simulate_linear_ensemble",
    "IntegrationError",
    "SolverConfig",
    "cole_hopf_reference",
    "simulate_burgers",
    "simulate_burgers_ensemble",
    "EnsembleResult",
    "ScalingFit",
    "ensemble_correlation",
    "ensemble_mean_energy",
    "fit_power_law",
    "RunConfig",
    "load_config",
]
