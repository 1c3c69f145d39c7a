"""Euler-Maruyama simulation of the chain with optional cosine perturbations.

Random streams: trajectory ``k`` under seed ``s`` draws from
``Generator(Philox(SeedSequence(s, spawn_key=(k,))))``. Each step consumes two
standard normals (ziggurat transform), for p_1 then p_N, in step order, so a
sample depends only on (seed, trajectory index, step index).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg as sla

from .chain import ChainParams, build_drift_matrix, build_interaction_matrix
from .errors import NumericalFailure

BLOWUP = 1e8


@dataclass(frozen=True)
class PotentialSpec:
    """Shifted-cosine perturbation: eps_pin sum(1 - cos q_i) + eps_int sum(1 - cos(q_{i+1} - q_i))."""

    eps_pin: float = 0.0
    eps_int: float = 0.0
    family: str = "cosine"

    def __post_init__(self):
        if self.eps_pin < 0 or self.eps_int < 0:
            raise ValueError("perturbation sizes must be non-negative")
        if self.family != "cosine":
            raise ValueError(f"unknown potential family {self.family!r}")

    @property
    def harmonic(self) -> bool:
        return self.eps_pin == 0 and self.eps_int == 0

    @property
    def c_pin(self) -> float:
        return self.eps_pin

    @property
    def c_int(self) -> float:
        return 4.0 * self.eps_int

    def energy(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        dq = np.diff(q, axis=-1)
        return self.eps_pin * np.sum(1 - np.cos(q), axis=-1) + self.eps_int * np.sum(1 - np.cos(dq), axis=-1)

    def gradient(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        g = self.eps_pin * np.sin(q)
        if self.eps_int:
            s = self.eps_int * np.sin(np.diff(q, axis=-1))
            g = g.copy()
            g[..., :-1] -= s
            g[..., 1:] += s
        return g


@dataclass(frozen=True)
class SdeConfig:
    dt: float = 1e-3
    n_steps: int = 100_000
    burn_in: int = 10_000
    seed: int = 0
    n_trajectories: int = 8
    n_batches: int = 10
    chunk: int = 4096

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.burn_in < self.n_steps:
            raise ValueError("need 0 <= burn_in < n_steps")
        if self.n_trajectories < 1 or self.n_batches < 2:
            raise ValueError("need at least one trajectory and two batches")
        if (self.n_steps - self.burn_in) < self.n_batches:
            raise ValueError("fewer samples than batches")


@dataclass
class TrajectoryStats:
    mean: np.ndarray
    cov: np.ndarray
    n_samples: int
    se_mean: np.ndarray
    se_cov: np.ndarray
    max_abs_state: float

    def as_dict(self) -> dict:
        d = asdict(self)
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in d.items()}


def drift(z: np.ndarray, params: ChainParams, pot: PotentialSpec = PotentialSpec()) -> np.ndarray:
    """Drift ``-M^T z`` plus the perturbing force on the momenta; batched over leading axes."""
    z = np.asarray(z, dtype=float)
    n = params.n
    p, q = z[..., :n], z[..., n:]
    B = build_interaction_matrix(params)
    dp = -q @ B
    dp[..., 0] -= params.gamma * p[..., 0]
    dp[..., -1] -= params.gamma * p[..., -1]
    if not pot.harmonic:
        dp = dp - pot.gradient(q)
    return np.concatenate([dp, p], axis=-1)


def trajectory_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _pairwise_sum(items):
    items = list(items)
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def simulate(params: ChainParams, pot: PotentialSpec, config: SdeConfig,
             z0: np.ndarray | None = None, dump_path: str | None = None) -> TrajectoryStats:
    """Integrate all trajectories in lockstep and return post-burn-in statistics.

    Standard errors come from batch means: each trajectory's sample is cut
    into ``n_batches`` consecutive blocks and the spread of the block
    estimates across all blocks gives the error.
    """
    n, K, dt = params.n, config.n_trajectories, config.dt
    normM = np.linalg.norm(build_drift_matrix(params), 2)
    if dt * normM >= 0.1:
        raise ValueError(f"stability guard: dt*||M||_2 = {dt * normM:.3g} >= 0.1")
    # one explicit Euler step of the linear part, acting on row vectors
    P = np.eye(2 * n) - dt * build_drift_matrix(params)
    amp = np.sqrt(2.0 * params.gamma * dt * np.array([params.t_left, params.t_right]))
    streams = [trajectory_stream(config.seed, k) for k in range(K)]

    Z = np.zeros((K, 2 * n)) if z0 is None else np.broadcast_to(np.asarray(z0, float), (K, 2 * n)).copy()
    n_keep = config.n_steps - config.burn_in
    batch_len = n_keep // config.n_batches
    used = batch_len * config.n_batches
    s1 = np.zeros((K, config.n_batches, 2 * n))
    s2 = np.zeros((K, config.n_batches, 2 * n, 2 * n))
    max_abs = 0.0
    dump = open(dump_path, "wb") if dump_path else None
    if dump:
        dump.write(struct.pack("<qdq", n, dt, used))

    step = 0
    buf = np.empty((config.chunk, K, 2 * n))
    try:
        while step < config.burn_in + used:
            L = min(config.chunk, config.burn_in + used - step)
            xi = np.stack([s.standard_normal((L, 2)) for s in streams], axis=1)
            xi *= amp
            harmonic = pot.harmonic
            for t in range(L):
                if harmonic:
                    Z = Z @ P
                else:
                    force = pot.gradient(Z[:, n:])
                    Z = Z @ P
                    Z[:, :n] -= dt * force
                Z[:, 0] += xi[t, :, 0]
                Z[:, n - 1] += xi[t, :, 1]
                buf[t] = Z
            chunk_max = float(np.abs(buf[:L]).max())
            if not np.isfinite(chunk_max) or chunk_max > BLOWUP:
                raise NumericalFailure(f"trajectory blow-up near step {step + L} (|z| = {chunk_max:.3e})")
            max_abs = max(max_abs, chunk_max)
            # statistics on post-burn-in steps of this chunk
            first = max(config.burn_in - step, 0)
            idx = step + np.arange(first, L) - config.burn_in
            if idx.size:
                blk = idx // batch_len
                states = buf[first:L]
                if dump:
                    dump.write(states[:, 0, :].astype("<f8").tobytes())
                for bi in np.unique(blk):
                    sel = states[blk == bi]
                    s1[:, bi] += sel.sum(axis=0)
                    per_traj = sel.transpose(1, 2, 0)
                    s2[:, bi] += per_traj @ per_traj.transpose(0, 2, 1)
            step += L
    finally:
        if dump:
            dump.close()

    nb = K * config.n_batches
    m1 = (s1 / batch_len).reshape(nb, 2 * n)
    m2 = (s2 / batch_len).reshape(nb, 2 * n, 2 * n)
    mean = _pairwise_sum(m1) / nb
    second = _pairwise_sum(m2) / nb
    cov = second - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    per_batch = m2 - mean[None, :, None] * mean[None, None, :]
    se_cov = per_batch.std(axis=0, ddof=1) / np.sqrt(nb)
    se_mean = m1.std(axis=0, ddof=1) / np.sqrt(nb)
    return TrajectoryStats(mean=mean, cov=cov, n_samples=int(K * used), se_mean=se_mean,
                           se_cov=se_cov, max_abs_state=max_abs)


def em_stationary_covariance(params: ChainParams, dt: float) -> np.ndarray:
    """Exact stationary covariance of the harmonic Euler-Maruyama chain at step ``dt``.

    Differs from the continuous-time covariance by O(dt); used to separate
    discretisation bias from sampling error.
    """
    P = np.eye(2 * params.n) - dt * build_drift_matrix(params)
    Q = np.zeros((2 * params.n, 2 * params.n))
    Q[0, 0] = 2.0 * params.gamma * params.t_left * dt
    Q[params.n - 1, params.n - 1] = 2.0 * params.gamma * params.t_right * dt
    S = sla.solve_discrete_lyapunov(P.T, Q)
    return 0.5 * (S + S.T)


def hamiltonian(z: np.ndarray, params: ChainParams, pot: PotentialSpec = PotentialSpec()) -> np.ndarray:
    n = params.n
    p, q = z[..., :n], z[..., n:]
    B = build_interaction_matrix(params)
    return 0.5 * np.sum(p * p, -1) + 0.5 * np.einsum("...i,ij,...j->...", q, B, q) + pot.energy(q)
