"""Harmonic sweep over odd N and log-log exponent fits for the main quantities."""

import argparse

from nessgap.chain import ChainParams
from nessgap.io import emit
from nessgap.sweep import OUTPUT_FIELDS, fit_power_law, run_sweep

FIELDS = ["norm_b", "norm_b_inv", "rho", "lambda_n", "budget", "lsi_nonperturbed", "entropy_rate"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=0.0)
    ap.add_argument("--start", type=int, default=51)
    ap.add_argument("--stop", type=int, default=301)
    ap.add_argument("--step", type=int, default=2)
    ap.add_argument("--convention", default="paper", choices=["paper", "physical"])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    recs = run_sweep(ChainParams(a=args.a), range(args.start, args.stop + 1, args.step),
                     args.convention, jobs=args.jobs)
    emit([r.as_dict() for r in recs], "csv", args.out, fields=OUTPUT_FIELDS)
    print(f"{'field':<18}{'exponent':>10}{'R2':>10}")
    for f in FIELDS:
        fit = fit_power_law(recs, f)
        print(f"{f:<18}{fit.exponent:>10.3f}{fit.r2:>10.5f}")
    bad = [r.n for r in recs if not r.ok]
    if bad:
        print("failed points:", bad)


if __name__ == "__main__":
    main()
