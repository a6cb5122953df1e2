"""Pickands constants H_alpha over a range of alpha, with the analytic values at 1 and 2.

    python scripts/pickands_constants.py --alphas 0.4 0.8 1 1.5 2 --out out/pickands.csv
"""
import argparse
import math
import warnings

from mbm_extremes.artifacts import write_csv
from mbm_extremes.constants_mc import ConstantsProtocol, estimate_pickands
from mbm_extremes.errors import AsymptoticWarning

EXACT = {1.0: 1.0, 2.0: 1 / math.sqrt(math.pi)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.4, 0.8, 1.0, 1.5, 2.0])
    ap.add_argument("--reps", type=int, default=ConstantsProtocol.reps)
    ap.add_argument("--delta", type=float, default=ConstantsProtocol.delta)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for alpha in args.alphas:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AsymptoticWarning)
            est = estimate_pickands(alpha, [4.0, 8.0, 16.0], args.delta, args.reps, args.seed,
                                    workers=args.workers)
        exact = EXACT.get(alpha)
        rows.append({"alpha": alpha, "value": est.value, "stderr": est.stderr,
                     "extrapolated": est.extrapolated_value, "exact": exact,
                     "warnings": len(caught)})
        tail = f"  exact {exact:.4f}" if exact else ""
        print(f"alpha={alpha:<4g} H={est.value:.4f} +- {est.stderr:.4f} "
              f"(extrapolated {est.extrapolated_value:.4f}){tail}")
    if args.out:
        write_csv(args.out, rows, ("alpha", "value", "stderr", "extrapolated", "exact", "warnings"))


if __name__ == "__main__":
    main()
