"""Lyapunov forms, spectral gaps and functional constants for boundary-driven harmonic chains."""

__version__ = "0.1.0"

from .chain import (ChainParams, build_drift_matrix, build_interaction_matrix, build_rhs_step,
                    derived_constants, noise_covariance, rhs_matrix)
from .constants import (FunctionalConstants, PerturbationBounds, compute_lambda, functional_constants,
                        perturbation_budget)
from .errors import NessgapError, NumericalFailure, VerificationFailure
from .lyapunov import LyapunovSolution, solve_dense_kron, solve_quadrature
from .solve import solve_lyapunov, stationary_covariance
from .spectral import eigenvalues, spectral_gap, spectral_report
from .structured import solve_structured, structured_blocks
from .sweep import fit_power_law, figure2_repro, run_sweep

__all__ = [
    "ChainParams", "build_drift_matrix", "build_interaction_matrix", "build_rhs_step",
    "derived_constants", "noise_covariance", "rhs_matrix", "FunctionalConstants",
    "PerturbationBounds", "compute_lambda", "functional_constants", "perturbation_budget",
    "NessgapError", "NumericalFailure", "VerificationFailure", "LyapunovSolution",
    "solve_dense_kron", "solve_quadrature", "solve_lyapunov", "stationary_covariance",
    "eigenvalues", "spectral_gap", "spectral_report", "solve_structured", "structured_blocks",
    "fit_power_law", "figure2_repro", "run_sweep",
]
