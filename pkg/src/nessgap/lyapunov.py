"""Generic solvers for ``b M + M^T b = Pi``.

Two methods that share nothing but the equation: an explicit Kronecker
vectorisation and a quadrature of ``int_0^inf exp(-t M^T) Pi exp(-t M) dt``.
Both serve as oracles for the structured construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .chain import split_blocks
from .errors import NumericalFailure

EPS = np.finfo(float).eps
KRON_MAX_DIM = 128

# relative residual targets, per method
RESIDUAL_RTOL = {"dense_kron": 1e-10, "quadrature": 1e-6, "structured": 1e-8}


@dataclass
class LyapunovSolution:
    b: np.ndarray
    residual_fro: float
    method: str
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.b.shape[0] // 2

    @property
    def x(self) -> np.ndarray:
        return split_blocks(self.b)[0]

    @property
    def z(self) -> np.ndarray:
        return split_blocks(self.b)[1]

    @property
    def y(self) -> np.ndarray:
        return split_blocks(self.b)[2]


def residual(b: np.ndarray, M: np.ndarray, Pi: np.ndarray) -> float:
    """Frobenius norm of ``b M + M^T b - Pi``."""
    b, M, Pi = np.asarray(b), np.asarray(M), np.asarray(Pi)
    if not (b.shape == M.shape == Pi.shape and b.ndim == 2 and b.shape[0] == b.shape[1]):
        raise ValueError(f"shape mismatch: b {b.shape}, M {M.shape}, Pi {Pi.shape}")
    return float(np.linalg.norm(b @ M + M.T @ b - Pi))


def residual_tolerance(method: str, M: np.ndarray, Pi: np.ndarray, b: np.ndarray) -> float:
    """Declared residual tolerance of a method.

    The relative target on ``||Pi||_F`` is augmented by the rounding floor
    ``64 eps ||M||_F ||b||_F`` that no floating-point solution can beat once
    ``b`` is large.
    """
    floor = 64 * EPS * np.linalg.norm(M) * np.linalg.norm(b)
    return float(RESIDUAL_RTOL[method] * np.linalg.norm(Pi) + floor)


def _check_stable(M: np.ndarray) -> None:
    lam = np.linalg.eigvals(M)
    if lam.real.min() <= 0:
        raise NumericalFailure(f"drift matrix not stable: min Re(eig) = {lam.real.min():.3e}")


def _symmetrize(b):
    return 0.5 * (b + b.T)


def solve_dense_kron(M: np.ndarray, Pi: np.ndarray, check_stable: bool = True) -> LyapunovSolution:
    """Solve by vectorising into a (2N)^2 dimensional linear system."""
    M = np.asarray(M, dtype=float)
    Pi = np.asarray(Pi, dtype=float)
    d = M.shape[0]
    if d > KRON_MAX_DIM:
        raise ValueError(f"Kronecker solve capped at dimension {KRON_MAX_DIM}, got {d}")
    if check_stable:
        _check_stable(M)
    eye = np.eye(d)
    # column-major vec: vec(bM) = (M^T kron I) vec(b), vec(M^T b) = (I kron M^T) vec(b)
    K = np.kron(M.T, eye) + np.kron(eye, M.T)
    rhs = Pi.reshape(-1, order="F")
    try:
        vec = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("singular vectorised system; drift matrix not stable") from exc
    b = _symmetrize(vec.reshape(d, d, order="F"))
    return LyapunovSolution(b=b, residual_fro=residual(b, M, Pi), method="dense_kron")


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on the base interval ``[0, h]``.

    The base interval is ``h = base_scale / ||M||_2``. Longer horizons are
    reached by interval doubling, using
    ``int_0^{2T} = int_0^T + E(T)^T (int_0^T) E(T)`` with ``E(T) = exp(-T M)``.
    """

    order: int = 12
    panels: int = 4
    base_scale: float = 1.0
    decay_tol: float = 1e-8
    max_doublings: int = 400


def _base_integral(M, Pi, h, order, panels):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    width = h / panels
    acc = np.zeros_like(Pi)
    for k in range(panels):
        left = k * width
        for s, w in zip(nodes, weights):
            t = left + 0.5 * width * (s + 1.0)
            E = sla.expm(-t * M)
            acc += 0.5 * width * w * (E.T @ Pi @ E)
    return acc


def _doubled(M, Pi, rule: QuadratureRule, panels: int, horizon: float | None):
    h = rule.base_scale / max(np.linalg.norm(M, 2), 1.0)
    b = _base_integral(M, Pi, h, rule.order, panels)
    E = sla.expm(-h * M)
    T = h
    for _ in range(rule.max_doublings):
        small = np.linalg.norm(E, 2) <= rule.decay_tol
        if horizon is None and small:
            break
        if horizon is not None and T >= horizon:
            if not small:
                raise NumericalFailure(
                    f"horizon {horizon:.3e} too short: ||exp(-T M)||_2 = {np.linalg.norm(E, 2):.3e}")
            break
        b = b + E.T @ b @ E
        E = E @ E
        T *= 2.0
    else:
        raise NumericalFailure("quadrature did not converge within the doubling cap")
    return _symmetrize(b), T


def solve_quadrature(M: np.ndarray, Pi: np.ndarray, horizon: float | None = None,
                     rule: QuadratureRule = QuadratureRule(), self_check: bool = True) -> LyapunovSolution:
    """Quadrature of the integral representation of the solution.

    ``horizon=None`` keeps doubling until ``||exp(-T M)||_2 <= rule.decay_tol``.
    With ``self_check`` the base rule is refined once (twice the panels) and
    the change is reported as ``info["refinement_change"]``.
    """
    M = np.asarray(M, dtype=float)
    Pi = np.asarray(Pi, dtype=float)
    b, T = _doubled(M, Pi, rule, rule.panels, horizon)
    info = {"horizon": T}
    if self_check:
        b2, _ = _doubled(M, Pi, rule, 2 * rule.panels, horizon)
        scale = max(np.linalg.norm(b2), np.finfo(float).tiny)
        change = float(np.linalg.norm(b2 - b) / scale) if np.any(b2) else 0.0
        info["refinement_change"] = change
        if change > RESIDUAL_RTOL["quadrature"]:
            raise NumericalFailure(f"quadrature not converged: refinement change {change:.3e}")
        b = b2
    return LyapunovSolution(b=b, residual_fro=residual(b, M, Pi), method="quadrature", info=info)
