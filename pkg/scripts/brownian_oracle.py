"""Grid refinement against the reflection principle P(sup_[0,1] B > u) = 2 Psi(u).

    python scripts/brownian_oracle.py --reps 200000 --out out/brownian_oracle.csv
"""
import argparse

from mbm_extremes.artifacts import write_csv
from mbm_extremes.asymptotics import Scenario
from mbm_extremes.harness import refinement_study
from mbm_extremes.hurst import Constant
from mbm_extremes.special import normal_tail


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--u", type=float, nargs="+", default=[1.0, 2.0, 2.5])
    ap.add_argument("--grids", type=int, nargs="+", default=[257, 513, 1025])
    ap.add_argument("--reps", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    sc = Scenario(Constant(h=0.5, t1=0.0, t2=1.0), "thm2_iii")
    st = refinement_study(sc, args.u, args.grids, args.reps, args.seed, workers=args.workers)
    rows = []
    print(f"{'u':>5} {'grid_n':>7} {'p_hat':>10} {'stderr':>9}")
    for r in st.rows:
        print(f"{r['u']:5.2f} {r['grid_n']:7d} {r['p_hat']:10.6f} {r['stderr']:9.2e}")
    print(f"\n{'u':>5} {'extrap':>10} {'exact':>10} {'z':>6}")
    for e in st.extrapolated:
        exact = 2 * float(normal_tail(e["u"]))
        z = (e["p_extrapolated"] - exact) / e["stderr"]
        print(f"{e['u']:5.2f} {e['p_extrapolated']:10.6f} {exact:10.6f} {z:+6.2f}")
        rows.append(dict(e, exact=exact, z=z))
    if args.out:
        write_csv(args.out, rows, ("u", "p_extrapolated", "stderr", "exact", "z", "monotone_ok"))


if __name__ == "__main__":
    main()
