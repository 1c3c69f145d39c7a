"""Closed-form functional-inequality constants built from ||b|| and ||b^-1||."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .chain import ChainParams


@dataclass(frozen=True)
class PerturbationBounds:
    c_pin: float = 0.0
    c_int: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.c_pin) and np.isfinite(self.c_int)):
            raise ValueError("perturbation bounds must be finite")
        if self.c_pin < 0 or self.c_int < 0:
            raise ValueError("perturbation bounds must be non-negative")

    @property
    def total(self) -> float:
        return self.c_pin + self.c_int


@dataclass
class FunctionalConstants:
    lambda_n: float
    poincare: float
    poincare_nonperturbed: float
    lsi_perturbed: float
    lsi_nonperturbed: float
    entropy_rate: float
    equiv_lower: float
    equiv_upper: float
    budget: float
    norm_b: float
    norm_b_inv: float
    convention: str = "paper"

    def hyper_q(self, t: float, p: float) -> float:
        return hypercontractivity_exponent(t, p, self.lsi_nonperturbed)

    def as_dict(self) -> dict:
        return asdict(self)


def compute_lambda(norm_b: float, norm_b_inv: float, bounds: PerturbationBounds = PerturbationBounds()) -> float:
    if norm_b <= 0 or norm_b_inv <= 0:
        raise ValueError("norms must be positive")
    return 1.0 / norm_b - 2.0 * bounds.total * norm_b * norm_b_inv


def perturbation_budget(norm_b: float, norm_b_inv: float) -> float:
    """Largest C_pin + C_int keeping the curvature constant non-negative."""
    if norm_b <= 0 or norm_b_inv <= 0:
        raise ValueError("norms must be positive")
    return 1.0 / (2.0 * norm_b**2 * norm_b_inv)


def _need_positive(lambda_n):
    if not lambda_n > 0:
        raise ValueError(f"constant undefined for non-positive curvature {lambda_n!r}")


def poincare_constant(params: ChainParams, norm_b_inv: float, lambda_n: float,
                      norm_b: float | None = None) -> float:
    """T_L ||b^-1|| / lambda; multiplied by ||b|| when ``norm_b`` is given."""
    _need_positive(lambda_n)
    value = params.t_left * norm_b_inv / lambda_n
    return value * norm_b if norm_b is not None else value


def lsi_constants(params: ChainParams, norm_b: float, norm_b_inv: float, lambda_n: float) -> tuple[float, float]:
    _need_positive(lambda_n)
    perturbed = params.t_left * norm_b_inv / (2.0 * lambda_n)
    return perturbed, perturbed * norm_b


def entropy_rate(lambda_n: float, t_left: float, norm_b_inv: float) -> float:
    _need_positive(lambda_n)
    return 2.0 * lambda_n**2 / (t_left * norm_b_inv)


def equivalence_bounds(b: np.ndarray) -> tuple[float, float]:
    w = np.linalg.eigvalsh(0.5 * (b + b.T))
    if w[0] <= 0:
        raise ValueError("equivalence bounds need a positive definite form")
    return float(w[0]), float(w[-1])


def hypercontractivity_exponent(t: float, p: float, lsi_nonperturbed: float) -> float:
    """Target exponent q(t) = 1 + exp(4 t / C) (p - 1)."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    if t < 0 or lsi_nonperturbed <= 0:
        raise ValueError("need t >= 0 and a positive constant")
    return 1.0 + np.exp(4.0 * t / lsi_nonperturbed) * (p - 1.0)


def functional_constants(params: ChainParams, b: np.ndarray,
                         bounds: PerturbationBounds = PerturbationBounds(),
                         convention: str = "paper") -> FunctionalConstants:
    lo, hi = equivalence_bounds(b)
    norm_b, norm_b_inv = hi, 1.0 / lo
    lam = compute_lambda(norm_b, norm_b_inv, bounds)
    nan = float("nan")
    if lam > 0:
        poinc = poincare_constant(params, norm_b_inv, lam)
        lsi_p, lsi_np = lsi_constants(params, norm_b, norm_b_inv, lam)
        rate = entropy_rate(lam, params.t_left, norm_b_inv)
    else:
        poinc = lsi_p = lsi_np = rate = nan
    return FunctionalConstants(
        lambda_n=lam, poincare=poinc, poincare_nonperturbed=poinc * norm_b,
        lsi_perturbed=lsi_p, lsi_nonperturbed=lsi_np, entropy_rate=rate,
        equiv_lower=lo, equiv_upper=hi, budget=perturbation_budget(norm_b, norm_b_inv),
        norm_b=norm_b, norm_b_inv=norm_b_inv, convention=convention)
