"""O(N^2)-memory construction of the full-step solution from its z first row.

For the last step (all ones on the q diagonal) the blocks ``x, z, y`` of
``b`` obey

    z + z^T = -I,   x = B y + Gamma z,
    x Gamma + Gamma x = J + B + B z - z B,
    y B - B y = Gamma + z Gamma + Gamma z,

where ``J`` is the p-block of the right-hand side. The antisymmetric part of
``z`` is a perturbed Toeplitz matrix: along the k-th superdiagonal every step
down adds ``-mu`` (k odd) or ``+1`` (k even). Hence ``z`` is fixed by its first
row ``zbar = (z_12, ..., z_1N)``. Given ``zbar``:

* the first row of ``x`` follows from the bordered entries of the third
  equation,
* the first row of ``y`` solves a tridiagonal system with ``B``,
* the remaining rows of ``y`` follow by marching the commutator equation,
* ``x = B y + Gamma z``.

Consistency of the last column of ``x`` from both routes gives N-1 affine
equations for ``zbar``, solved densely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .chain import (ChainParams, build_drift_matrix, build_interaction_matrix,
                    derived_constants, friction_matrix, join_blocks, rhs_matrix, build_rhs_step)
from .errors import NumericalFailure
from .lyapunov import LyapunovSolution, residual, residual_tolerance

_CHUNK = 32


@dataclass
class FirstRowVector:
    entries: np.ndarray
    condition: float
    convention: str = "paper"


@dataclass
class StructuredBlocks:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    provenance: dict = field(default_factory=dict)


def boundary_kappa(pi_entry: float, a: float, c: float) -> float:
    """Offset linking z_12 and x_11 through the left bath entry of the p block."""
    return (pi_entry + a + 2.0 * c) / (2.0 * c)


def _step_offsets(n: int, mu: float) -> np.ndarray:
    k = np.arange(n)
    return np.where(k % 2 == 1, -mu, 1.0)


def _left_B(X, a, c):
    """B @ X along axis -2, using the tridiagonal structure."""
    out = (a + 2.0 * c) * X
    out[..., 1:, :] -= c * X[..., :-1, :]
    out[..., :-1, :] -= c * X[..., 1:, :]
    return out


def _right_B(X, a, c):
    out = (a + 2.0 * c) * X
    out[..., :, 1:] -= c * X[..., :, :-1]
    out[..., :, :-1] -= c * X[..., :, 1:]
    return out


def _z_from_rows(zbar: np.ndarray, n: int, mu: float, affine: bool = True) -> np.ndarray:
    """Batched perturbed Toeplitz fill; ``zbar`` has shape (K, n-1)."""
    K = zbar.shape[0]
    za = np.zeros((K, n, n))
    d = _step_offsets(n, mu)
    for k in range(1, n):
        rows = np.arange(n - k)
        za[:, rows, rows + k] = zbar[:, k - 1, None]
        if affine:
            za[:, rows, rows + k] += rows * d[k]
    z = za - np.swapaxes(za, 1, 2)
    if affine:
        z -= 0.5 * np.eye(n)
    return z


def _blocks_from_rows(params: ChainParams, zbar: np.ndarray, p_diag: np.ndarray,
                      affine: bool = True):
    """Return batched (x, y, z, e) for first rows ``zbar`` of shape (K, n-1).

    With ``affine=False`` every inhomogeneous term is dropped, which yields
    the linear part of the map.
    """
    n, a, c, g = params.n, params.a, params.c, params.gamma
    mu = derived_constants(params).mu
    z = _z_from_rows(zbar, n, mu, affine)

    e = _left_B(z, a, c) - _right_B(z, a, c)
    if affine:
        e += build_interaction_matrix(params) + np.diag(p_diag)

    r4 = np.zeros_like(z)
    r4[:, 0, :] += g * z[:, 0, :]
    r4[:, -1, :] += g * z[:, -1, :]
    r4[:, :, 0] += g * z[:, :, 0]
    r4[:, :, -1] += g * z[:, :, -1]
    if affine:
        r4 += friction_matrix(params)

    x_row = e[:, 0, :] / g
    x_row[:, 0] *= 0.5
    x_row[:, -1] *= 0.5

    rhs = x_row - g * z[:, 0, :] + r4[:, 0, :]
    band = np.zeros((3, n))
    band[0, 1:] = -c
    band[1, :] = a + 2.0 * c
    band[2, :-1] = -c
    y_first = sla.solve_banded((1, 1), band, rhs.T, check_finite=False).T

    K = zbar.shape[0]
    ypad = np.zeros((K, n, n + 2))
    ypad[:, 0, 1:-1] = y_first
    for i in range(n - 1):
        nxt = r4[:, i, :] / c + ypad[:, i, :-2] + ypad[:, i, 2:]
        if i > 0:
            nxt -= ypad[:, i - 1, 1:-1]
        ypad[:, i + 1, 1:-1] = nxt
    y = ypad[:, :, 1:-1]

    x = _left_B(y, a, c)
    x[:, 0, :] += g * z[:, 0, :]
    x[:, -1, :] += g * z[:, -1, :]
    return x, y, z, e


def _column_mismatch(params, x, e):
    g = params.gamma
    target = e[:, 1:, -1] / g
    target[:, -1] *= 0.5
    return x[:, 1:, -1] - target


def _check_odd(params: ChainParams):
    if params.n < 3 or params.n % 2 == 0:
        raise ValueError(f"structured construction needs odd n >= 3, got n={params.n}")


def _p_diag(params: ChainParams, convention: str) -> np.ndarray:
    return build_rhs_step(params, params.n, convention).diagonal[:params.n]


def reduced_system(params: ChainParams, convention: str = "paper"):
    """Matrix A and vector r0 with mismatch(zbar) = A zbar + r0."""
    n = params.n
    p_diag = _p_diag(params, convention)
    x0, _, _, e0 = _blocks_from_rows(params, np.zeros((1, n - 1)), p_diag)
    r0 = _column_mismatch(params, x0, e0)[0]
    A = np.empty((n - 1, n - 1))
    eye = np.eye(n - 1)
    for start in range(0, n - 1, _CHUNK):
        cols = eye[start:start + _CHUNK]
        x, _, _, e = _blocks_from_rows(params, cols, p_diag, affine=False)
        A[:, start:start + cols.shape[0]] = _column_mismatch(params, x, e).T
    return A, r0


def solve_first_row(params: ChainParams, convention: str = "paper",
                    max_condition: float = 1e12) -> FirstRowVector:
    """First row of the antisymmetric part of z for the full step."""
    _check_odd(params)
    A, r0 = reduced_system(params, convention)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > max_condition:
        raise NumericalFailure(f"reduced first-row system ill-conditioned (cond = {cond:.3e})")
    zbar = np.linalg.solve(A, -r0)
    return FirstRowVector(entries=zbar, condition=cond, convention=convention)


def assemble_z(params: ChainParams, zbar) -> np.ndarray:
    entries = np.asarray(getattr(zbar, "entries", zbar), dtype=float)
    return _z_from_rows(entries[None, :], params.n, derived_constants(params).mu)[0]


def assemble_y(params: ChainParams, zbar, convention: str | None = None) -> np.ndarray:
    conv = convention or getattr(zbar, "convention", "paper")
    entries = np.asarray(getattr(zbar, "entries", zbar), dtype=float)
    _, y, _, _ = _blocks_from_rows(params, entries[None, :], _p_diag(params, conv))
    return 0.5 * (y[0] + y[0].T)


def assemble_x(params: ChainParams, y: np.ndarray, z: np.ndarray, sym_tol: float = 1e-9) -> np.ndarray:
    x = build_interaction_matrix(params) @ y + friction_matrix(params) @ z
    scale = max(np.abs(x).max(), 1.0)
    defect = np.abs(x - x.T).max() / scale
    if defect > sym_tol:
        raise NumericalFailure(f"x block not symmetric (relative defect {defect:.3e})")
    return 0.5 * (x + x.T)


def assemble_b(params: ChainParams, x, y, z, convention: str = "paper") -> LyapunovSolution:
    b = join_blocks(x, z, y)
    M = build_drift_matrix(params)
    Pi = rhs_matrix(params, convention=convention)
    res = residual(b, M, Pi)
    tol = residual_tolerance("structured", M, Pi, b)
    if res > tol:
        raise NumericalFailure(f"structured residual {res:.3e} exceeds tolerance {tol:.3e}")
    try:
        np.linalg.cholesky(b)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("structured solution is not positive definite") from exc
    return LyapunovSolution(b=b, residual_fro=res, method="structured",
                            info={"tolerance": tol})


def solve_structured(params: ChainParams, convention: str = "paper") -> LyapunovSolution:
    row = solve_first_row(params, convention)
    z = assemble_z(params, row)
    y = assemble_y(params, row, convention)
    x = assemble_x(params, y, z)
    sol = assemble_b(params, x, y, z, convention)
    sol.info.update(condition=row.condition, convention=convention)
    return sol


def structured_blocks(params: ChainParams, convention: str = "paper") -> StructuredBlocks:
    row = solve_first_row(params, convention)
    z = assemble_z(params, row)
    y = assemble_y(params, row, convention)
    x = assemble_x(params, y, z)
    return StructuredBlocks(x=x, y=y, z=z, provenance={
        "z": "perturbed Toeplitz fill from the first row",
        "y[0]": "tridiagonal solve with B on the bordered x row",
        "y[1:]": "march of y B - B y = Gamma + z Gamma + Gamma z",
        "x": "B y + Gamma z",
    })


def asymptotic_z1N(params: ChainParams) -> float:
    """Geometric predictor R^(1-N) (kappa_R - kappa_L) / (2 gamma) for z_1N."""
    dc = derived_constants(params)
    return dc.r_growth ** (1 - params.n) * (dc.kappa_right - dc.kappa_left) / (2.0 * params.gamma)


def z1N_decay_rate(params: ChainParams) -> float:
    """Per-site decay rate of z_1N: the larger root of t^2 - R t + 1 is exp(rate)."""
    R = derived_constants(params).r_growth
    return float(np.arccosh(R / 2.0))


def first_row_recurrence(params: ChainParams, kmax: int):
    """Coefficients (p_k, q_k) with z_{1,N-k} = p_k z_{1,N} + q_k, k = 0..kmax.

    ``p`` follows p_0 = 1, p_1 = R, p_k = R p_{k-1} - p_{k-2}; ``q`` is the
    forcing ``k mu / 2`` for odd k and ``-k / 2`` for even k.
    """
    dc = derived_constants(params)
    p = np.empty(kmax + 1)
    p[0] = 1.0
    if kmax >= 1:
        p[1] = dc.r_growth
    for k in range(2, kmax + 1):
        p[k] = dc.r_growth * p[k - 1] - p[k - 2]
    k = np.arange(kmax + 1)
    q = np.where(k % 2 == 1, k * dc.mu / 2.0, -k / 2.0)
    return p, q
