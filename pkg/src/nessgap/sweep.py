"""Parameter sweeps over chain length, disk cache, power-law fits and the gap series."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, fields
from pathlib import Path

import numpy as np

from .chain import ChainParams, build_drift_matrix
from .constants import functional_constants
from .errors import NessgapError, NumericalFailure
from .solve import choose_method, solve_lyapunov
from .spectral import eigenvalues, spectral_gap

log = logging.getLogger(__name__)

CACHE_VERSION = 1
FIGURE2_MAX_N = 400


class CacheCorruption(NessgapError):
    """A cache entry whose stored checksum does not match its payload."""


@dataclass
class SweepRecord:
    n: int
    a: float
    c: float
    gamma: float
    t_left: float
    t_right: float
    convention: str
    method: str
    norm_b: float
    norm_b_inv: float
    rho: float
    lambda_n: float
    budget: float
    lsi_perturbed: float
    lsi_nonperturbed: float
    entropy_rate: float
    residual_fro: float
    wall_time: float
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def key(self) -> tuple:
        return (self.n, self.a, self.c, self.gamma, self.t_left, self.t_right, self.convention)

    def params(self) -> ChainParams:
        return ChainParams(n=self.n, a=self.a, c=self.c, gamma=self.gamma,
                           t_left=self.t_left, t_right=self.t_right)

    def as_dict(self) -> dict:
        return asdict(self)


RECORD_FIELDS = [f.name for f in fields(SweepRecord)]
# columns written to sweep output files; timings go to the metadata sidecar
OUTPUT_FIELDS = [f for f in RECORD_FIELDS if f != "wall_time"]


@dataclass
class ScalingFit:
    field: str
    n_grid: list
    exponent: float
    intercept: float
    r2: float

    def as_dict(self) -> dict:
        return asdict(self)


def compute_record(params: ChainParams, convention: str = "paper", method: str = "auto") -> SweepRecord:
    t0 = time.perf_counter()
    base = dict(n=params.n, a=params.a, c=params.c, gamma=params.gamma,
                t_left=params.t_left, t_right=params.t_right, convention=convention)
    chosen = choose_method(params) if method == "auto" else method
    try:
        sol = solve_lyapunov(params, None, convention, chosen)
        fc = functional_constants(params, sol.b, convention=convention)
        rho = spectral_gap(eigenvalues(build_drift_matrix(params), spot_check=4))
        rec = SweepRecord(**base, method=sol.method, norm_b=fc.norm_b, norm_b_inv=fc.norm_b_inv,
                          rho=rho, lambda_n=fc.lambda_n, budget=fc.budget,
                          lsi_perturbed=fc.lsi_perturbed, lsi_nonperturbed=fc.lsi_nonperturbed,
                          entropy_rate=fc.entropy_rate, residual_fro=sol.residual_fro,
                          wall_time=time.perf_counter() - t0)
        bad = [k for k in OUTPUT_FIELDS if isinstance(getattr(rec, k), float) and not math.isfinite(getattr(rec, k))]
        if bad:
            raise NumericalFailure(f"non-finite fields {bad} at n={params.n}")
        return rec
    except (NessgapError, ValueError, np.linalg.LinAlgError) as exc:
        nan = float("nan")
        log.warning("sweep point n=%d failed: %s", params.n, exc)
        return SweepRecord(**base, method=chosen, norm_b=nan, norm_b_inv=nan, rho=nan, lambda_n=nan,
                           budget=nan, lsi_perturbed=nan, lsi_nonperturbed=nan, entropy_rate=nan,
                           residual_fro=nan, wall_time=time.perf_counter() - t0,
                           error=f"{type(exc).__name__}: {exc}")


def default_cache_dir() -> Path:
    env = os.environ.get("NESSGAP_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "nessgap"


def _cache_key(params: ChainParams, convention: str, method: str) -> str:
    blob = json.dumps({"params": params.as_dict(), "convention": convention, "method": method,
                       "version": CACHE_VERSION}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _checksum(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _cache_load(path: Path) -> SweepRecord | None:
    if not path.exists():
        return None
    try:
        blob = json.loads(path.read_text())
        record = blob["record"]
        stored = blob["checksum"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CacheCorruption(f"unreadable cache entry {path}: {exc}") from exc
    if _checksum(record) != stored:
        raise CacheCorruption(f"checksum mismatch in cache entry {path}")
    return SweepRecord(**record)


def _cache_store(path: Path, rec: SweepRecord) -> None:
    payload = rec.as_dict()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    # json keeps NaN as a bare token which it reads back, so failed points cache too
    tmp.write_text(json.dumps({"record": payload, "checksum": _checksum(payload)}, sort_keys=True))
    tmp.replace(path)


def _point(args):
    params, convention, method = args
    return compute_record(params, convention, method)


def run_sweep(template: ChainParams, n_list, convention: str = "paper", method: str = "auto",
              jobs: int = 1, cache: bool = True, cache_dir=None) -> list[SweepRecord]:
    """One record per N in ``n_list``, sorted by N; failed points carry an ``error`` string."""
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list:
        raise ValueError("n_list is empty")
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    points = [template.with_n(n) for n in n_list]
    found: dict[int, SweepRecord] = {}
    todo = []
    for p in points:
        path = cache_dir / f"{_cache_key(p, convention, method)}.json"
        rec = _cache_load(path) if cache else None
        if rec is not None:
            found[p.n] = rec
        else:
            todo.append((p, path))
    args = [(p, convention, method) for p, _ in todo]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            fresh = list(ex.map(_point, args))
    else:
        fresh = [_point(a) for a in args]
    for (p, path), rec in zip(todo, fresh):
        found[p.n] = rec
        if cache:
            _cache_store(path, rec)
    records = [found[n] for n in n_list]
    if all(not r.ok for r in records):
        raise NumericalFailure(f"every sweep point failed; first error: {records[0].error}")
    return records


def fit_power_law(records, field: str) -> ScalingFit:
    """Least-squares line through (log N, log value); failed records are skipped."""
    pts = sorted((int(_get(r, "n")), float(_get(r, field))) for r in records if not _get(r, "error", ""))
    ns = [n for n, _ in pts]
    vals = np.array([v for _, v in pts])
    if len(ns) < 5:
        raise ValueError(f"need at least 5 points to fit {field!r}, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("N grid must be strictly increasing")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError(f"field {field!r} has non-positive or non-finite values")
    x, y = np.log(np.array(ns, dtype=float)), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0 else float(np.clip(1.0 - np.sum(resid**2) / sst, 0.0, 1.0))
    return ScalingFit(field=field, n_grid=ns, exponent=float(slope), intercept=float(intercept), r2=r2)


def _get(r, name, default=None):
    if isinstance(r, dict):
        return r.get(name, default)
    return getattr(r, name, default)


def figure2_repro(max_n: int = 300, n_list=None, template: ChainParams | None = None) -> list[dict]:
    """Spectral gap series ``(n, rho, rho_n3)``; default grid is every 10th N up to ``max_n``."""
    if max_n > FIGURE2_MAX_N:
        raise ValueError(f"max_n must be at most {FIGURE2_MAX_N}")
    template = template or ChainParams(n=2)
    if n_list is None:
        n_list = range(10, max_n + 1, 10)
    n_list = [n for n in n_list if n <= max_n]
    if not n_list:
        raise ValueError("empty N grid")
    rows = []
    for n in n_list:
        rho = spectral_gap(eigenvalues(build_drift_matrix(template.with_n(n)), spot_check=4))
        rows.append({"n": int(n), "rho": rho, "rho_n3": rho * n**3})
    return rows


def sweep_norms_inverse_spread(records) -> float:
    vals = [r.norm_b_inv for r in records if r.ok]
    return max(vals) / min(vals)

