"""Exact Gaussian evolution under the harmonic flow, W2 and relative entropy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .chain import ChainParams, build_drift_matrix, noise_covariance
from .constants import compute_lambda
from .solve import solve_lyapunov, stationary_covariance
from .spectral import eigenvalues, form_norms, spectral_gap


@dataclass
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        if self.cov.shape != (self.mean.size, self.mean.size):
            raise ValueError("mean and covariance sizes differ")
        if not np.allclose(self.cov, self.cov.T, rtol=1e-10, atol=1e-14):
            raise ValueError("covariance must be symmetric")
        self.cov = 0.5 * (self.cov + self.cov.T)
        w = np.linalg.eigvalsh(self.cov)
        if w[0] < -1e-12 * max(abs(w[-1]), 1e-300):
            raise ValueError(f"covariance not PSD (min eigenvalue {w[0]:.3e})")


def _psd_sqrt(S):
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    w = np.where(w > 1e-14 * max(w[-1], 0.0), w, 0.0)
    return (V * np.sqrt(w)) @ V.T


def w2_gaussian(g1: GaussianState, g2: GaussianState) -> float:
    """Wasserstein-2 distance via the Bures formula."""
    if np.array_equal(g1.mean, g2.mean) and np.array_equal(g1.cov, g2.cov):
        return 0.0
    r2 = _psd_sqrt(g2.cov)
    cross = _psd_sqrt(r2 @ g1.cov @ r2)
    bures = np.trace(g1.cov) + np.trace(g2.cov) - 2.0 * np.trace(cross)
    d2 = float(np.sum((g1.mean - g2.mean) ** 2) + max(bures, 0.0))
    return float(np.sqrt(d2))


def kl_gaussian(g1: GaussianState, g2: GaussianState) -> float:
    """KL(g1 || g2) for Gaussians; needs a nonsingular ``g2`` covariance."""
    d = g1.mean.size
    try:
        L = np.linalg.cholesky(g2.cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("reference covariance is singular") from exc
    A = sla.solve_triangular(L, g1.cov, lower=True)
    trace_term = np.trace(sla.solve_triangular(L, A.T, lower=True))
    dm = sla.solve_triangular(L, g2.mean - g1.mean, lower=True)
    sign, logdet1 = np.linalg.slogdet(g1.cov)
    if sign <= 0:
        return float("inf")
    logdet2 = 2.0 * np.sum(np.log(np.diag(L)))
    return float(max(0.5 * (trace_term + dm @ dm - d + logdet2 - logdet1), 0.0))


class HarmonicFlow:
    """Gaussian transition of ``dz = -M^T z dt + sqrt(D) dW``; caches Sigma_inf."""

    def __init__(self, params: ChainParams, sigma_inf: np.ndarray | None = None):
        self.params = params
        self.M = build_drift_matrix(params)
        self.D = noise_covariance(params)
        self.sigma_inf = stationary_covariance(params).b if sigma_inf is None else sigma_inf

    def propagator(self, t: float) -> np.ndarray:
        return sla.expm(-t * self.M.T)

    def evolve(self, g0: GaussianState, t: float) -> GaussianState:
        E = self.propagator(t)
        cov = self.sigma_inf + E @ (g0.cov - self.sigma_inf) @ E.T
        return GaussianState(E @ g0.mean, 0.5 * (cov + cov.T))

    def stationary(self) -> GaussianState:
        return GaussianState(np.zeros(2 * self.params.n), self.sigma_inf)


def gaussian_evolve(g0: GaussianState, params: ChainParams, t: float, eps: float = 0.0) -> GaussianState:
    if eps != 0.0:
        raise ValueError("exact Gaussian evolution only exists for the harmonic chain")
    return HarmonicFlow(params).evolve(g0, t)


@dataclass
class ContractionReport:
    lambda_n: float
    prefactor: float
    rho: float
    max_ratio: float
    slopes: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    slope_violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.slope_violations


def random_gaussian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> GaussianState:
    A = rng.standard_normal((dim, dim))
    cov = scale * (A @ A.T / dim + 0.1 * np.eye(dim))
    return GaussianState(scale * rng.standard_normal(dim), cov)


def asymptotic_log_slope(flow: HarmonicFlow, g1: GaussianState, g2: GaussianState,
                         rho: float, decay: float = 1e-3, samples: int = 200) -> float:
    """Least-squares slope of log W2 on ``[T/2, T]`` with ``exp(-rho T) = decay``."""
    t_end = np.log(1.0 / decay) / rho
    ts = np.linspace(0.5 * t_end, t_end, samples)
    step = flow.propagator(ts[1] - ts[0])
    a, b = flow.evolve(g1, ts[0]), flow.evolve(g2, ts[0])
    logs = []
    for _ in ts:
        logs.append(np.log(w2_gaussian(a, b)))
        a = GaussianState(step @ a.mean, flow.sigma_inf + step @ (a.cov - flow.sigma_inf) @ step.T)
        b = GaussianState(step @ b.mean, flow.sigma_inf + step @ (b.cov - flow.sigma_inf) @ step.T)
    return float(np.polyfit(ts, logs, 1)[0])


def contraction_check(params: ChainParams, pairs, t_grid, slack: float = 1e-9,
                      slope_slack: float = 1e-6) -> ContractionReport:
    """W2 contraction with prefactor sqrt(||b|| ||b^-1||) and rate 1/||b||.

    ``b`` is the physical full-step form. Also records the measured late-time
    slope of log W2 for every pair and compares it with half the rate.
    """
    b = solve_lyapunov(params, None, "physical").b
    nb, nbi = form_norms(b)
    lam = compute_lambda(nb, nbi)
    pref = float(np.sqrt(nb * nbi))
    flow = HarmonicFlow(params)
    rho = spectral_gap(eigenvalues(flow.M, spot_check=0))
    rep = ContractionReport(lambda_n=lam, prefactor=pref, rho=rho, max_ratio=0.0)
    for k, (g1, g2) in enumerate(pairs):
        w0 = w2_gaussian(g1, g2)
        for t in t_grid:
            wt = w2_gaussian(flow.evolve(g1, t), flow.evolve(g2, t))
            bound = pref * np.exp(-lam * t) * w0
            if bound > 0:
                rep.max_ratio = max(rep.max_ratio, wt / bound)
            if wt > bound * (1 + slack):
                rep.violations.append({"pair": k, "t": float(t), "w2": wt, "bound": bound})
        if w0 > 0:
            s = asymptotic_log_slope(flow, g1, g2, rho)
            rep.slopes.append(s)
            if s > -lam / 2 + slope_slack:
                rep.slope_violations.append({"pair": k, "slope": s, "limit": -lam / 2})
    return rep
