import numpy as np
import pytest
from hypothesis import given, strategies as st

from nessgap.chain import ChainParams, noise_covariance
from nessgap.gaussian import (GaussianState, HarmonicFlow, contraction_check, gaussian_evolve,
                              kl_gaussian, random_gaussian, w2_gaussian)
from nessgap.spectral import eigenvalues, spectral_gap

seeds = st.integers(0, 2**32 - 1)


def test_w2_examples():
    g = GaussianState([0.0], [[1.0]])
    assert w2_gaussian(g, g) == 0.0
    assert w2_gaussian(g, GaussianState([3.0], [[1.0]])) == pytest.approx(3.0, abs=1e-12)
    for d in (1, 3, 7):
        a = GaussianState(np.zeros(d), np.eye(d))
        b = GaussianState(np.zeros(d), 4 * np.eye(d))
        assert w2_gaussian(a, b) == pytest.approx(np.sqrt(d), rel=1e-12)


@given(seeds)
def test_w2_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    g1, g2, g3 = (random_gaussian(4, rng) for _ in range(3))
    d12, d21 = w2_gaussian(g1, g2), w2_gaussian(g2, g1)
    assert d12 == pytest.approx(d21, rel=1e-9, abs=1e-12)
    assert d12 <= w2_gaussian(g1, g3) + w2_gaussian(g3, g2) + 1e-12
    assert d12 > 0


def test_state_validation():
    with pytest.raises(ValueError):
        GaussianState([0, 0], [[1, 0.5], [0, 1]])
    with pytest.raises(ValueError):
        GaussianState([0, 0], [[1, 0], [0, -1]])
    with pytest.raises(ValueError):
        GaussianState([0], np.eye(2))


@given(seeds)
def test_kl_nonnegative_and_zero_on_identical(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_gaussian(5, rng), random_gaussian(5, rng)
    assert kl_gaussian(g1, g2) >= 0
    assert kl_gaussian(g1, g1) == pytest.approx(0.0, abs=1e-10)


def test_kl_known_value_and_singular_reference():
    a = GaussianState([0.0], [[1.0]])
    b = GaussianState([1.0], [[2.0]])
    expected = 0.5 * (0.5 + 0.5 - 1 + np.log(2))
    assert kl_gaussian(a, b) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        kl_gaussian(a, GaussianState([0.0], [[0.0]]))


@pytest.fixture(scope="module")
def flow():
    return HarmonicFlow(ChainParams(n=4))


def test_stationary_is_fixed_point(flow):
    s = flow.stationary()
    for t in (0.1, 1.0, 10.0):
        e = flow.evolve(s, t)
        assert np.abs(e.cov - s.cov).max() <= 1e-10
        assert np.abs(e.mean).max() == 0


def test_long_time_convergence(flow, rng):
    g = random_gaussian(8, rng)
    rho = spectral_gap(eigenvalues(flow.M))
    e = flow.evolve(g, 50 / rho)
    assert np.linalg.norm(e.cov - flow.sigma_inf) < 1e-8


def test_semigroup(flow, rng):
    g = random_gaussian(8, rng)
    a = flow.evolve(flow.evolve(g, 0.7), 1.9)
    b = flow.evolve(g, 2.6)
    assert np.abs(a.cov - b.cov).max() <= 1e-9 and np.abs(a.mean - b.mean).max() <= 1e-9


def test_covariance_flow_solves_differential_lyapunov(flow, rng):
    g = random_gaussian(8, rng)
    M, D = flow.M, flow.D
    h = 1e-4
    for t in (0.3, 1.5, 4.0):
        dS = (flow.evolve(g, t + h).cov - flow.evolve(g, t - h).cov) / (2 * h)
        S = flow.evolve(g, t).cov
        assert np.abs(dS - (-M.T @ S - S @ M + D)).max() <= 1e-6


def test_kl_decreases_along_flow(flow, rng):
    g = random_gaussian(8, rng, scale=3.0)
    target = flow.stationary()
    kls = [kl_gaussian(flow.evolve(g, t), target) for t in np.linspace(0, 20, 41)]
    assert np.all(np.diff(kls) <= 1e-12)


def test_evolve_rejects_anharmonic(rng):
    with pytest.raises(ValueError):
        gaussian_evolve(random_gaussian(4, rng), ChainParams(n=2), 1.0, eps=0.1)


def test_flow_noise_is_physical():
    p = ChainParams(n=3, gamma=2.0)
    assert np.array_equal(HarmonicFlow(p).D, noise_covariance(p))


def test_contraction_trivial_pairs(rng):
    p = ChainParams(n=2)
    g = random_gaussian(4, rng)
    rep = contraction_check(p, [(g, g)], [0.5, 1.0])
    assert rep.passed and rep.max_ratio == 0.0
    h = GaussianState(g.mean + 1.0, g.cov)
    flow = HarmonicFlow(p)
    rep = contraction_check(p, [(g, h)], [0.5, 1.0, 2.0])
    assert rep.passed
    w = w2_gaussian(flow.evolve(g, 2.0), flow.evolve(h, 2.0))
    assert w == pytest.approx(np.linalg.norm(flow.propagator(2.0) @ np.ones(4)), rel=1e-8)
