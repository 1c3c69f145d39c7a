"""Command-line entry point: ``nessgap <subcommand> [options]``.

Exit codes: 0 ok, 1 usage error, 2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import datetime as _dt
import functools
import platform
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .chain import CONVENTIONS, ChainParams, build_drift_matrix, build_interaction_matrix, rhs_matrix
from .constants import PerturbationBounds, functional_constants
from .errors import NumericalFailure, VerificationFailure
from .io import emit, format_value, save_solution, to_json
from .lemmas import all_passed, verify_lemmas
from .sde import PotentialSpec, SdeConfig, simulate as run_simulation
from .solve import METHODS, solve_lyapunov, stationary_covariance
from .spectral import spectral_report
from .sweep import OUTPUT_FIELDS, figure2_repro, run_sweep

EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 1, 2, 3


def parse_n_list(text: str) -> list[int]:
    """``start:stop:step`` with an inclusive stop, or a comma list."""
    try:
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"expected start:stop:step or a comma list, got {text!r}")


def chain_options(default_n=5):
    def deco(f):
        @click.option("--n", "n", type=int, default=default_n, show_default=True, help="number of particles")
        @click.option("--a", type=float, default=0.0, show_default=True, help="pinning coefficient")
        @click.option("--c", type=float, default=1.0, show_default=True, help="coupling coefficient")
        @click.option("--gamma", type=float, default=1.0, show_default=True, help="end friction")
        @click.option("--tl", type=float, default=1.5, show_default=True, help="left temperature")
        @click.option("--tr", type=float, default=0.5, show_default=True, help="right temperature")
        @functools.wraps(f)
        def wrapper(n, a, c, gamma, tl, tr, **kw):
            try:
                params = ChainParams(n=n, a=a, c=c, gamma=gamma, t_left=tl, t_right=tr)
            except ValueError as exc:
                raise click.BadParameter(str(exc))
            return f(params=params, **kw)
        return wrapper
    return deco


convention_opt = click.option("--convention", type=click.Choice(CONVENTIONS), default="paper", show_default=True)
method_opt = click.option("--method", type=click.Choice(METHODS), default="auto", show_default=True)
out_opt = click.option("--out", type=click.Path(dir_okay=False), default=None, help="output file (stdout if absent)")
format_opt = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)


def _metadata(params: ChainParams | None, extra: dict, started: float) -> dict:
    return {
        "version": __version__,
        "defaults": ChainParams().as_dict(),
        "params": params.as_dict() if params else None,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "elapsed_s": time.perf_counter() - started,
        "python": platform.python_version(),
        **extra,
    }


def _write_meta(out: str | None, meta: dict) -> None:
    if out:
        Path(out + ".meta.json").write_text(to_json(meta) + "\n")


def _emit_obj(obj, out: str | None) -> None:
    text = to_json(obj) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _emit_rows(rows, fields, fmt, out):
    if out:
        emit(rows, fmt, out, fields=fields)
    elif fmt == "json":
        click.echo(to_json([{k: r[k] for k in fields} for r in rows]))
    else:
        click.echo(",".join(fields))
        for r in rows:
            click.echo(",".join(format_value(r[k]) for k in fields))


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True, help="more logging")
def cli(verbose):
    """Boundary-driven harmonic chain: Lyapunov forms, gaps, constants and simulation."""
    import logging
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@chain_options()
@convention_opt
@click.option("--m", "m", type=int, default=None, help="step index of the right-hand side (full step if absent)")
@out_opt
def model(params, convention, m, out):
    """Print the coupling matrix B, drift matrix M and right-hand side."""
    obj = {"params": params.as_dict(), "B": build_interaction_matrix(params),
           "M": build_drift_matrix(params), "Pi": rhs_matrix(params, m, convention),
           "m": params.n if m is None else m, "convention": convention}
    _emit_obj(obj, out)


@cli.command()
@chain_options()
@convention_opt
@method_opt
@click.option("--m", "m", type=int, default=None, help="step index (full step if absent)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="basename for .csv matrix and .json sidecar")
def solve(params, convention, method, m, out):
    """Solve the Lyapunov equation for one chain."""
    sol = solve_lyapunov(params, m, convention, method)
    summary = {"method": sol.method, "residual_fro": sol.residual_fro, "params": params.as_dict(),
               "convention": convention, "m": params.n if m is None else m}
    if out:
        save_solution(out, sol, params)
    else:
        summary["b"] = sol.b
    _emit_obj(summary, None)


@cli.command()
@chain_options()
@convention_opt
@method_opt
@out_opt
def gap(params, convention, method, out):
    """Spectral gap of the drift matrix with its two-sided bounds."""
    b = solve_lyapunov(params, None, convention, method).b
    rep = spectral_report(params, b)
    d = rep.as_dict()
    d["sandwich_holds"] = rep.sandwich_holds()
    _emit_obj(d, out)


@cli.command()
@chain_options()
@convention_opt
@method_opt
@click.option("--c-pin", type=float, default=0.0, show_default=True)
@click.option("--c-int", type=float, default=0.0, show_default=True)
@out_opt
def constants(params, convention, method, c_pin, c_int, out):
    """Curvature, Poincare, log-Sobolev and entropy-rate constants."""
    started = time.perf_counter()
    b = solve_lyapunov(params, None, convention, method).b
    fc = functional_constants(params, b, PerturbationBounds(c_pin, c_int), convention)
    _emit_obj(fc.as_dict(), out)
    _write_meta(out, _metadata(params, {"command": "constants"}, started))


@cli.command()
@chain_options()
@click.option("--n-list", "n_list", required=True, help="start:stop:step (inclusive) or comma list")
@convention_opt
@method_opt
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--no-cache", is_flag=True, help="recompute every point")
@out_opt
@format_opt
def sweep(params, n_list, convention, method, jobs, no_cache, out, fmt):
    """Solve and summarise the chain over a range of N."""
    started = time.perf_counter()
    ns = parse_n_list(n_list)
    if not ns:
        raise click.BadParameter("empty --n-list")
    recs = run_sweep(params, ns, convention, method, jobs=jobs, cache=not no_cache)
    _emit_rows([r.as_dict() for r in recs], OUTPUT_FIELDS, fmt, out)
    _write_meta(out, _metadata(params, {"command": "sweep", "n_list": ns, "jobs": jobs,
                                        "wall_time": {r.n: r.wall_time for r in recs}}, started))
    failed = [r for r in recs if not r.ok]
    for r in failed:
        click.echo(f"n={r.n}: {r.error}", err=True)


@cli.command()
@chain_options(default_n=2)
@click.option("--max-n", type=int, default=300, show_default=True)
@click.option("--n-list", "n_list", default=None, help="explicit grid instead of every 10th N")
@out_opt
@format_opt
def figure2(params, max_n, n_list, out, fmt):
    """Series (N, rho, rho N^3) of the drift-matrix spectral gap."""
    started = time.perf_counter()
    try:
        rows = figure2_repro(max_n, parse_n_list(n_list) if n_list else None, template=params)
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    _emit_rows(rows, ["n", "rho", "rho_n3"], fmt, out)
    _write_meta(out, _metadata(params, {"command": "figure2", "max_n": max_n}, started))


@cli.command()
@chain_options(default_n=4)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--steps", type=int, default=200_000, show_default=True)
@click.option("--burn-in", type=int, default=20_000, show_default=True)
@click.option("--trajectories", type=int, default=8, show_default=True)
@click.option("--batches", type=int, default=10, show_default=True)
@click.option("--eps-pin", type=float, default=0.0, show_default=True)
@click.option("--eps-int", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dump", type=click.Path(dir_okay=False), default=None, help="binary dump of trajectory 0")
@out_opt
def simulate(params, dt, steps, burn_in, trajectories, batches, eps_pin, eps_int, seed, dump, out):
    """Euler-Maruyama run; reports covariance, standard errors and the harmonic reference."""
    started = time.perf_counter()
    try:
        pot = PotentialSpec(eps_pin, eps_int)
        cfg = SdeConfig(dt=dt, n_steps=steps, burn_in=burn_in, seed=seed,
                        n_trajectories=trajectories, n_batches=batches)
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    stats = run_simulation(params, pot, cfg, dump_path=dump)
    obj = stats.as_dict()
    if pot.harmonic:
        ref = stationary_covariance(params).b
        obj["reference_cov"] = ref
        with np.errstate(divide="ignore", invalid="ignore"):
            zs = np.abs(stats.cov - ref) / stats.se_cov
        obj["max_z_score"] = float(np.nanmax(zs))
    _emit_obj(obj, out)
    _write_meta(out, _metadata(params, {"command": "simulate", "config": cfg.__dict__}, started))


@cli.command("verify-lemmas")
@chain_options()
@convention_opt
@method_opt
@click.option("--tol", type=float, default=1e-8, show_default=True)
def verify_lemmas_cmd(params, convention, method, tol):
    """Check every block identity of the full-step form and print a table."""
    if params.n % 2 == 0 or params.n < 5:
        raise click.BadParameter("verify-lemmas needs odd n >= 5")
    sol = solve_lyapunov(params, None, convention, method)
    reports = verify_lemmas(params, sol.x, sol.y, sol.z, convention, tol)
    width = max(len(r.lemma_id) for r in reports)
    click.echo(f"{'identity':<{width}}  {'defect':>10}  {'tolerance':>10}  result")
    for r in reports:
        click.echo(f"{r.lemma_id:<{width}}  {r.max_abs_defect:10.3e}  {r.tolerance:10.3e}  "
                   f"{'PASS' if r.passed else 'FAIL'}")
    click.echo(f"method={sol.method} n={params.n} convention={convention}")
    if not all_passed(reports):
        raise VerificationFailure("one or more identities failed")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="nessgap", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except NumericalFailure as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERICAL
    except VerificationFailure as exc:
        click.echo(f"verification failure: {exc}", err=True)
        return EXIT_VERIFY
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
