import numpy as np
import pytest
from hypothesis import given, strategies as st

from nessgap.chain import ChainParams
from nessgap.constants import (PerturbationBounds, compute_lambda, entropy_rate, equivalence_bounds,
                               functional_constants, hypercontractivity_exponent, lsi_constants,
                               perturbation_budget, poincare_constant)
from nessgap.solve import solve_lyapunov
from nessgap.sweep import fit_power_law, run_sweep

pos = st.floats(1e-3, 1e3)
ULP4 = 4 * np.finfo(float).eps


def test_lambda_examples():
    assert compute_lambda(4.0, 2.0) == 0.25
    assert compute_lambda(1.0, 1.0, PerturbationBounds(0.25, 0.25)) == 0.0
    with pytest.raises(ValueError):
        compute_lambda(0.0, 1.0)


def test_budget_examples():
    assert perturbation_budget(1.0, 1.0) == 0.5
    with pytest.raises(ValueError):
        perturbation_budget(1.0, -1.0)


@given(pos, pos)
def test_budget_is_the_zero_of_lambda(nb, nbi):
    c0 = perturbation_budget(nb, nbi)
    lo = compute_lambda(nb, nbi, PerturbationBounds(0.9 * c0, 0))
    hi = compute_lambda(nb, nbi, PerturbationBounds(0, 1.1 * c0))
    assert lo > 0 > hi
    assert lo == pytest.approx(0.1 / nb, rel=1e-12)


def test_poincare_examples():
    p = ChainParams(n=3, t_left=1.0, t_right=0.5)
    assert poincare_constant(p, 1.0, 1.0) == 1.0
    p2 = ChainParams(n=3, t_left=3.0, t_right=0.5)
    assert poincare_constant(p2, 2.0, 0.5) == 3 * poincare_constant(p, 2.0, 0.5)
    assert poincare_constant(p, 2.0, 0.5, norm_b=7.0) == 7 * poincare_constant(p, 2.0, 0.5)
    with pytest.raises(ValueError):
        poincare_constant(p, 1.0, 0.0)


def test_lsi_examples():
    p = ChainParams(n=3, t_left=1.2)
    lp, lnp = lsi_constants(p, 5.0, 2.0, 0.1)
    assert lp == poincare_constant(p, 2.0, 0.1) / 2
    assert lnp == lp * 5.0
    q = ChainParams(n=3, t_left=2.4)
    assert lsi_constants(q, 5.0, 2.0, 0.1) == (2 * lp, 2 * lnp)


def test_entropy_rate_examples():
    assert entropy_rate(1.0, 2.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        entropy_rate(-1.0, 1.0, 1.0)


def test_equivalence_examples(rng):
    assert equivalence_bounds(np.eye(3)) == (1.0, 1.0)
    b = solve_lyapunov(ChainParams(n=6)).b
    lo, hi = equivalence_bounds(b)
    assert hi == pytest.approx(np.linalg.norm(b, 2), rel=1e-12)
    assert lo == pytest.approx(1 / np.linalg.norm(np.linalg.inv(b), 2), rel=1e-10)
    for _ in range(100):
        g = rng.standard_normal(12)
        q = g @ b @ g
        gg = g @ g
        assert lo * gg * (1 - 1e-12) <= q <= hi * gg * (1 + 1e-12)
    with pytest.raises(ValueError):
        equivalence_bounds(np.diag([1.0, -1.0]))


def test_hypercontractivity_examples():
    assert hypercontractivity_exponent(0.0, 3.0, 2.0) == 3.0
    C = 5.0
    assert hypercontractivity_exponent(C * np.log(2) / 4, 2.0, C) == pytest.approx(3.0, rel=1e-14)
    ts = np.linspace(0, 3, 20)
    qs = [hypercontractivity_exponent(t, 1.5, C) for t in ts]
    assert np.all(np.diff(qs) > 0)
    with pytest.raises(ValueError):
        hypercontractivity_exponent(1.0, 1.0, C)


@given(st.integers(2, 9), st.sampled_from(["paper", "physical"]), st.floats(0, 0.4))
def test_constants_consistency(n, conv, frac):
    p = ChainParams(n=n)
    b = solve_lyapunov(p, None, conv).b
    nb = np.linalg.eigvalsh(b)[-1]
    nbi = 1 / np.linalg.eigvalsh(b)[0]
    budget = perturbation_budget(nb, nbi)
    fc = functional_constants(p, b, PerturbationBounds(frac * budget, frac * budget), conv)
    assert fc.convention == conv
    assert fc.lambda_n > 0
    for v in (fc.poincare, fc.lsi_perturbed, fc.lsi_nonperturbed, fc.entropy_rate, fc.budget):
        assert np.isfinite(v) and v > 0
    close = lambda u, v: abs(u - v) <= ULP4 * abs(v)
    assert close(fc.lsi_perturbed, fc.poincare / 2)
    assert close(fc.lsi_nonperturbed, fc.lsi_perturbed * fc.norm_b)
    assert close(fc.entropy_rate, fc.lambda_n / fc.lsi_perturbed)
    assert close(fc.entropy_rate, 2 * fc.lambda_n**2 / (p.t_left * fc.norm_b_inv))
    assert close(fc.poincare_nonperturbed, fc.poincare * fc.norm_b)
    assert fc.hyper_q(0.0, 2.0) == 2.0


def test_harmonic_lambda_is_inverse_norm():
    p = ChainParams(n=7)
    fc = functional_constants(p, solve_lyapunov(p).b)
    assert fc.lambda_n == 1 / fc.norm_b


def test_undefined_constants_when_budget_exceeded():
    p = ChainParams(n=5)
    b = solve_lyapunov(p).b
    fc = functional_constants(p, b, PerturbationBounds(1.0, 0.0))
    assert fc.lambda_n < 0 and np.isnan(fc.poincare)


def test_bounds_validation():
    with pytest.raises(ValueError):
        PerturbationBounds(-1.0, 0.0)
    with pytest.raises(ValueError):
        PerturbationBounds(np.inf, 0.0)


@pytest.fixture(scope="module")
def pinned_sweep(tmp_path_factory):
    grid = range(31, 302, 30)
    return run_sweep(ChainParams(n=5, a=1.0), grid, cache_dir=tmp_path_factory.mktemp("c"))


@pytest.mark.parametrize("field,target,halfwidth", [
    ("norm_b", 3, 0.3), ("lambda_n", -3, 0.3), ("budget", -6, 0.6),
    ("lsi_nonperturbed", 6, 0.6), ("entropy_rate", -6, 0.6)])
def test_pinned_sweep_exponents(pinned_sweep, field, target, halfwidth):
    fit = fit_power_law(pinned_sweep, field)
    assert abs(fit.exponent - target) <= halfwidth and fit.r2 >= 0.98


def test_pinned_poincare_nonperturbed_exponent(pinned_sweep):
    rows = [{"n": r.n, "pn": r.norm_b * r.norm_b_inv * r.t_left / r.lambda_n, "error": ""}
            for r in pinned_sweep]
    assert 5.4 <= fit_power_law(rows, "pn").exponent <= 6.6


def test_pinned_scaled_quantities_bounded(pinned_sweep):
    ns = np.array([r.n for r in pinned_sweep], float)
    lam = np.array([r.lambda_n for r in pinned_sweep]) * ns**3
    bud = np.array([r.budget for r in pinned_sweep]) * ns**6
    lsi = np.array([r.lsi_nonperturbed for r in pinned_sweep]) / ns**6
    for v in (lam, bud, lsi):
        assert v.max() / v.min() <= 2.0
