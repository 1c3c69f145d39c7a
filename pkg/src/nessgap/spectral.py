"""Eigenvalues of the drift matrix and norms of the Lyapunov form."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .chain import ChainParams, build_drift_matrix
from .errors import NumericalFailure

MAX_EIG_DIM = 1000


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    rho: float
    trace_defect: float
    lower_bound: float
    upper_bound: float
    norm_b: float
    norm_b_inv: float

    def sandwich_holds(self, slack: float = 1e-9) -> bool:
        return self.lower_bound * (1 - slack) <= self.rho <= self.upper_bound * (1 + slack)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["eigenvalues"] = [[float(v.real), float(v.imag)] for v in self.eigenvalues]
        return d


def eigenvalues(M: np.ndarray, spot_check: int = 10, seed: int = 0) -> np.ndarray:
    """All eigenvalues of a real matrix, sorted by real part.

    With ``spot_check > 0`` that many eigenpairs are drawn at random and
    their residual ``||M v - lambda v||`` is checked against ``1e-8 ||M||_2``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"dense eigensolver capped at dimension {MAX_EIG_DIM}")
    try:
        if spot_check:
            lam, V = np.linalg.eig(M)
        else:
            lam = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("eigenvalue iteration did not converge") from exc
    if spot_check:
        rng = np.random.default_rng(seed)
        pick = rng.choice(lam.size, size=min(spot_check, lam.size), replace=False)
        normM = np.linalg.norm(M, 2)
        for k in pick:
            v = V[:, k]
            err = np.linalg.norm(M @ v - lam[k] * v) / np.linalg.norm(v)
            if err > 1e-8 * normM:
                raise NumericalFailure(f"eigenpair {k} residual {err:.3e} too large")
    # real input: force exact conjugate symmetry
    lam = np.where(np.abs(lam.imag) <= 1e-14 * np.abs(lam), lam.real + 0j, lam)
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


def spectral_gap(lam: np.ndarray) -> float:
    return float(np.min(np.real(lam)))


def spectral_norm(A: np.ndarray) -> float:
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T, rtol=1e-12, atol=0):
        raise ValueError("spectral_norm expects a symmetric matrix")
    w = np.linalg.eigvalsh(A)
    return float(np.abs(w).max())


def form_norms(b: np.ndarray) -> tuple[float, float]:
    """(||b||_2, ||b^-1||_2) of a positive definite form, without inversion."""
    w = np.linalg.eigvalsh(0.5 * (b + b.T))
    if w[0] <= 0:
        raise NumericalFailure(f"form is not positive definite (min eigenvalue {w[0]:.3e})")
    return float(w[-1]), float(1.0 / w[0])


def condition_product(b: np.ndarray) -> float:
    nb, nbi = form_norms(b)
    return nb * nbi


def spectral_report(params: ChainParams, b: np.ndarray, spot_check: int = 10) -> SpectralReport:
    lam = eigenvalues(build_drift_matrix(params), spot_check=spot_check)
    nb, nbi = form_norms(b)
    return SpectralReport(
        eigenvalues=lam,
        rho=spectral_gap(lam),
        trace_defect=float(abs(np.sum(lam.real) - 2.0 * params.gamma)),
        lower_bound=1.0 / (2.0 * nb),
        upper_bound=params.gamma / params.n,
        norm_b=nb,
        norm_b_inv=nbi,
    )
