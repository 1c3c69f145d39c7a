"""Method routing for the Lyapunov equation of a given chain and step."""

from __future__ import annotations

import logging
import warnings

from .chain import ChainParams, build_drift_matrix, rhs_matrix
from .lyapunov import LyapunovSolution, solve_dense_kron, solve_quadrature
from .structured import solve_structured

log = logging.getLogger(__name__)

METHODS = ("auto", "dense", "quadrature", "structured")
DENSE_AUTO_MAX_DIM = 64


def choose_method(params: ChainParams, m: int | None = None) -> str:
    m = params.n if m is None else m
    if 2 * params.n <= DENSE_AUTO_MAX_DIM:
        return "dense"
    if m == params.n and params.n % 2 == 1:
        return "structured"
    if m == params.n:
        warnings.warn(f"structured path needs odd n; n={params.n} falls back to quadrature",
                      RuntimeWarning, stacklevel=3)
    return "quadrature"


def solve_lyapunov(params: ChainParams, m: int | None = None, convention: str = "paper",
                   method: str = "auto") -> LyapunovSolution:
    """Solve ``b M + M^T b = Pi_m``; ``m=None`` is the full step."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    m = params.n if m is None else m
    if method == "auto":
        method = choose_method(params, m)
    log.debug("solving n=%d m=%d with %s", params.n, m, method)
    if method == "structured":
        if m != params.n:
            raise ValueError("structured construction covers the full step only")
        return solve_structured(params, convention)
    M = build_drift_matrix(params)
    Pi = rhs_matrix(params, m, convention)
    if method == "dense":
        sol = solve_dense_kron(M, Pi)
    else:
        sol = solve_quadrature(M, Pi)
    sol.info.setdefault("convention", convention)
    return sol


def stationary_covariance(params: ChainParams, method: str = "auto") -> LyapunovSolution:
    """Covariance of the harmonic steady state: the physical step-0 solution."""
    return solve_lyapunov(params, 0, "physical", method)
