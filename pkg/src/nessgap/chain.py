"""Model matrices for a harmonic chain with Langevin baths at both ends.

State vectors are ordered ``(p_1..p_N, q_1..q_N)`` everywhere in the package.
The drift of the SDE is ``-M^T z`` with ``M = [[Gamma, -I], [B, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace

import numpy as np

CONVENTIONS = ("paper", "physical")


@dataclass(frozen=True)
class ChainParams:
    """Physical parameters of the chain.

    Parameters
    ----------
    n : int
        Number of particles, at least 2.
    a : float
        Harmonic pinning coefficient.
    c : float
        Nearest-neighbour coupling.
    gamma : float
        Friction acting on the two end particles.
    t_left, t_right : float
        Bath temperatures at particle 1 and particle N.
    """

    n: int = 5
    a: float = 0.0
    c: float = 1.0
    gamma: float = 1.0
    t_left: float = 1.5
    t_right: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not self.a >= 0:
            raise ValueError(f"pinning a must be >= 0, got {self.a}")
        if not self.c > 0:
            raise ValueError(f"coupling c must be > 0, got {self.c}")
        if not self.gamma > 0:
            raise ValueError(f"friction gamma must be > 0, got {self.gamma}")
        if not (self.t_left > 0 and self.t_right > 0):
            raise ValueError("temperatures must be positive")
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta_t(self) -> float:
        return 0.5 * (self.t_left - self.t_right)

    @property
    def t_mean(self) -> float:
        return 0.5 * (self.t_left + self.t_right)

    def with_n(self, n: int) -> "ChainParams":
        return replace(self, n=n)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedConstants:
    mu: float
    kappa_left: float
    kappa_right: float
    r_growth: float


def derived_constants(params: ChainParams) -> DerivedConstants:
    a, c, g = params.a, params.c, params.gamma
    return DerivedConstants(
        mu=(1.0 + a + 2.0 * c) / (2.0 * c),
        kappa_left=(params.t_left + a + 2.0 * c) / (2.0 * c),
        kappa_right=(params.t_right + a + 2.0 * c) / (2.0 * c),
        r_growth=c / g**2 + (a + 2.0 * c) / c,
    )


@dataclass(frozen=True)
class RhsStep:
    """Diagonal right-hand side of the m-th Lyapunov equation."""

    m: int
    diagonal: np.ndarray
    convention: str = "paper"

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


def build_interaction_matrix(params: ChainParams) -> np.ndarray:
    n, a, c = params.n, params.a, params.c
    B = (a + 2.0 * c) * np.eye(n)
    idx = np.arange(n - 1)
    B[idx, idx + 1] = -c
    B[idx + 1, idx] = -c
    return B


def interaction_eigenvalues(params: ChainParams) -> np.ndarray:
    """Closed-form spectrum of the tridiagonal Toeplitz matrix, ascending."""
    k = np.arange(1, params.n + 1)
    return params.a + 2.0 * params.c - 2.0 * params.c * np.cos(k * np.pi / (params.n + 1))


def friction_matrix(params: ChainParams) -> np.ndarray:
    G = np.zeros((params.n, params.n))
    G[0, 0] = G[-1, -1] = params.gamma
    return G


def build_drift_matrix(params: ChainParams) -> np.ndarray:
    n = params.n
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = friction_matrix(params)
    M[:n, n:] = -np.eye(n)
    M[n:, :n] = build_interaction_matrix(params)
    return M


def noise_covariance(params: ChainParams) -> np.ndarray:
    """Diffusion matrix D of the SDE: 2*gamma*T on p_1 and p_N only."""
    n = params.n
    D = np.zeros((2 * n, 2 * n))
    D[0, 0] += 2.0 * params.gamma * params.t_left
    D[n - 1, n - 1] += 2.0 * params.gamma * params.t_right
    return D


def build_rhs_step(params: ChainParams, m: int, convention: str = "paper") -> RhsStep:
    """Diagonal of the right-hand side after m inward filling steps.

    The temperature entries sit at p_1 and p_N. Each step switches on one
    more unit entry from each end, in the q block starting at the ends and
    in the p block starting next to the bath sites. ``m = 0`` keeps only
    the temperatures, ``m = n`` gives the full positive diagonal.
    With ``convention="physical"`` the temperature entries carry the
    friction factor, so that ``m = 0`` reproduces the SDE noise.
    """
    n = params.n
    if int(m) != m or not 0 <= m <= n:
        raise ValueError(f"step m must be in [0, {n}], got {m}")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    m = int(m)
    scale = params.gamma if convention == "physical" else 1.0
    p = np.zeros(n)
    q = np.zeros(n)
    i = np.arange(1, n + 1)
    q[(i <= m) | (i >= n - m + 1)] = 1.0
    interior = (i >= 2) & (i <= n - 1)
    p[interior & ((i <= m + 1) | (i >= n - m))] = 1.0
    p[0] = 2.0 * scale * params.t_left
    p[-1] = 2.0 * scale * params.t_right
    return RhsStep(m=m, diagonal=np.concatenate([p, q]), convention=convention)


def rhs_matrix(params: ChainParams, m: int | None = None, convention: str = "paper") -> np.ndarray:
    """Full right-hand side matrix; ``m=None`` means the last step ``m = n``."""
    return build_rhs_step(params, params.n if m is None else m, convention).matrix


def gibbs_covariance(params: ChainParams) -> np.ndarray:
    """Covariance of exp(-H/T) for the quadratic Hamiltonian (equal temperatures)."""
    if params.t_left != params.t_right:
        raise ValueError("Gibbs covariance needs t_left == t_right")
    n, T = params.n, params.t_left
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = T * np.eye(n)
    S[n:, n:] = T * np.linalg.inv(build_interaction_matrix(params))
    return S


def split_blocks(b: np.ndarray):
    """Return the (x, z, y) blocks of a 2N x 2N matrix."""
    n = b.shape[0] // 2
    return b[:n, :n], b[:n, n:], b[n:, n:]


def join_blocks(x: np.ndarray, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.block([[x, z], [z.T, y]])
