"""Named structural identities of the full-step solution blocks.

Every check takes plain ``(x, y, z)`` blocks, so it can be run on the
structured construction and on a generic solver's output alike. Identities
assume odd ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .chain import (ChainParams, build_interaction_matrix, build_rhs_step, derived_constants,
                    friction_matrix)
from .structured import boundary_kappa, first_row_recurrence


@dataclass
class LemmaReport:
    lemma_id: str
    max_abs_defect: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def _report(name, defects, scale, tol):
    defects = np.abs(np.asarray(defects, dtype=float))
    worst = float(defects.max()) if defects.size else 0.0
    limit = tol * max(1.0, float(scale))
    return LemmaReport(name, worst, limit, bool(worst <= limit))


def _step(k, mu):
    return -mu if k % 2 == 1 else 1.0


def verify_lemmas(params: ChainParams, x, y, z, convention: str = "paper",
                  tol: float = 1e-8) -> list[LemmaReport]:
    """Evaluate every block identity; entries are 1-indexed in the comments."""
    n, a, c, g = params.n, params.a, params.c, params.gamma
    if n % 2 == 0 or n < 5:
        raise ValueError("identities are stated for odd n >= 5")
    mu = derived_constants(params).mu
    B = build_interaction_matrix(params)
    G = friction_matrix(params)
    za = z + 0.5 * np.eye(n)
    Z = lambda i, j: za[i - 1, j - 1]
    X = lambda i, j: x[i - 1, j - 1]
    Y = lambda i, j: y[i - 1, j - 1]
    sz = np.abs(z).max()
    sx = np.abs(x).max()
    sy = np.abs(y).max()
    out = []

    out.append(_report("z_plus_zT_is_minus_identity", z + z.T + np.eye(n), sz, tol))
    out.append(_report("z_diagonal_is_minus_half", np.diag(z) + 0.5, sz, tol))
    out.append(_report("x_equals_By_plus_Gamma_z", x - B @ y - G @ z, sx, tol))
    out.append(_report("x_symmetric", x - x.T, sx, tol))
    out.append(_report("y_symmetric", y - y.T, sy, tol))

    d = [Z(i, i + k) - Z(i - 1, i + k - 1) - _step(k, mu)
         for k in range(1, n - 1) for i in range(2, n - k + 1)]
    out.append(_report("perturbed_toeplitz_steps", d, sz, tol))

    d = [Z(2, k) - Z(1, k - 1) - _step(k, mu) for k in range(3, n + 1)]
    d += [Z(n - 1, k) - Z(n, k + 1) - _step(k, mu) for k in range(1, n - 1)]
    out.append(_report("second_and_second_to_last_line", d, sz, tol))

    d = []
    for k in range(1, n - 1):
        if k % 2 == 1:
            d += [Z(i, i + k) - Z(n - k - (i - 1), n - (i - 1)) - (n - k - 2 * i + 1) * mu
                  for i in range(1, (n - k) // 2 + 1)]
        else:
            d += [Z(i, i + k) - Z(n - k - (i - 1), n - (i - 1)) - (k - n + 2 * i - 1)
                  for i in range(1, (n - k - 1) // 2 + 1)]
    out.append(_report("z_cross_diagonal", d, sz, tol))

    d = [Z(1, 1 + k) + Z(n, n - k) - ((n - k - 1) * mu if k % 2 == 1 else k - n + 1)
         for k in range(1, n - 1)]
    out.append(_report("first_last_row_link", d, sz, tol))

    d, d_last, d_cross = [], [], []
    for k in range(3, n + 1):
        first = X(1, k - 1) * g / c
        last = -X(n, n - k + 2) * g / c
        if k % 2 == 1:
            d.append(Z(1, k) - 1.0 - first)
            d_last.append(Z(1, k) - last + (n - k + 1))
            d_cross.append(X(1, k - 1) + X(n, n - k + 2) + (c / g) * (n - k + 2))
        else:
            d.append(Z(1, k) + mu - first)
            d_last.append(Z(1, k) - last - (n - k + 1) * mu)
            d_cross.append(X(1, k - 1) + X(n, n - k + 2) - (c / g) * (n - k + 2) * mu)
    out.append(_report("z_first_row_from_x_first_row", d, max(sz, sx), tol))
    out.append(_report("z_first_row_from_x_last_row", d_last, max(sz, sx), tol))
    out.append(_report("x_cross_diagonal", d_cross, sx, tol))

    pi_left = build_rhs_step(params, n, convention).diagonal[0]
    kappa = boundary_kappa(pi_left, a, c)
    out.append(_report("z12_from_x11", [Z(1, 2) - (g / c * X(1, 1) - kappa)], max(sz, sx), tol))
    out.append(_report("x_corner_value", [X(1, n) - c * mu / (2 * g)], sx, tol))

    d = [Y(i - 1, i + k) - Y(i, i + k - 1) + Y(i + 1, i + k) - Y(i, i + k + 1)
         for k in range(1, n - 2) for i in range(2, n - k)]
    out.append(_report("y_interior_commutation", d, sy, tol))
    d = [Y(2, k) - Y(1, k - 1) - Y(1, k + 1) - g / c * Z(1, k) for k in range(2, n)]
    d.append(Y(2, n) - Y(1, n - 1) - 2 * g / c * Z(1, n))
    out.append(_report("y_second_line", d, max(sy, sz), tol))
    d = [Y(k, n) - g / c * (Z(k - 1, n) + Z(1, n - (k - 2))) - Y(1, n - (k - 1))
         for k in range(2, n + 1)]
    out.append(_report("y_last_column", d, max(sy, sz), tol))

    zt = first_row_source(params, z, convention)
    out.append(_report("y_first_row_solves_B", B @ y[0, ::-1] - zt, max(sy, np.abs(zt).max()), tol))

    p, q = first_row_recurrence(params, n - 2)
    d = [(Z(1, n - k) - p[k] * Z(1, n) - q[k]) / max(1.0, abs(p[k])) for k in range(n - 1)
         if abs(p[k]) < 1e8]
    out.append(_report("first_row_three_term_recurrence", d, sz, tol))
    return out


def first_row_source(params: ChainParams, z, convention: str = "paper") -> np.ndarray:
    """Vector ``v`` with ``B reversed(y[0]) = v``, built from the z first row."""
    n, a, c, g = params.n, params.a, params.c, params.gamma
    mu = derived_constants(params).mu
    pi_left = build_rhs_step(params, n, convention).diagonal[0]
    zr = z[0]
    v = np.empty(n)
    v[0] = g * zr[n - 1] + c * mu / (2 * g)
    for i in range(1, n - 1):
        # entry i pairs with y_{1, N-i} and z_{1, N-i+1}
        v[i] = c / g * zr[n - i] + (-c / g if i % 2 == 1 else c * mu / g)
    v[n - 1] = c / g * zr[1] + c / g * boundary_kappa(pi_left, a, c) + g / 2
    return v


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)


def stated_cosh_alpha(gamma: float) -> float:
    """Decay constant in the closed form as commonly quoted: 1 + 1/(2 gamma)."""
    return 1.0 + 1.0 / (2.0 * gamma)


def exact_cosh_alpha(params: ChainParams) -> float:
    """Decay constant of the step-0 first row: half the growth factor R."""
    return derived_constants(params).r_growth / 2.0


def step0_profile_ratios(z0: np.ndarray, cosh_alpha: float) -> np.ndarray:
    """Ratios z0[1, j+1] / (sinh((N-j) alpha) / sinh(N alpha)) for j = 1..N-1."""
    n = z0.shape[0]
    alpha = np.arccosh(cosh_alpha)
    j = np.arange(1, n)
    # sinh((N-j)a)/sinh(Na) evaluated without overflow
    profile = np.exp(-j * alpha) * (1 - np.exp(-2 * (n - j) * alpha)) / (1 - np.exp(-2 * n * alpha))
    return z0[0, 1:] / profile


def resolvable(row: np.ndarray, norm_b: float, rtol: float = 1e-8) -> np.ndarray:
    """Mask of entries large enough to carry ``rtol`` relative accuracy.

    A backward-stable solve leaves absolute errors of order ``1000 eps ||b||``
    in every entry, so smaller entries cannot be compared at ``rtol``.
    """
    floor = 1e3 * np.finfo(float).eps * norm_b / rtol
    return np.abs(row) >= floor


def ratio_spread(ratios: np.ndarray) -> float:
    """Relative spread (max - min) / max|.| of a ratio sequence."""
    ratios = np.asarray(ratios)
    return float((ratios.max() - ratios.min()) / np.abs(ratios).max())
