"""Event counts against n for random linear motion, with a power-law fit.

    python scripts/scaling.py --sizes 16 32 64 128 --runs 10
"""
import argparse
import csv
import sys

import numpy as np

from semiyao_kds.scenario import generate_scenario
from semiyao_kds.simulation import RunConfig, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--degree", type=int, default=1)
    ap.add_argument("--mode", default="ann")
    ap.add_argument("--seed", type=int, default=50_000)
    args = ap.parse_args()

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(("n", "run", "swaps", "tournament", "edge_changes", "cost_units"))
    means = []
    for n in args.sizes:
        rows = []
        for k in range(args.runs):
            scn = generate_scenario(n, dim=args.dim, degree=args.degree, seed=args.seed + 100 * n + k)
            _, res = run_scenario(scn, RunConfig(mode=args.mode, log_events=False))
            s = res.stats
            rows.append((s["u_swaps"] + s["x_swaps"], s["tournament"]))
            out.writerow((n, k, rows[-1][0], s["tournament"], s["edge_changes"], s["cost_units"]))
        means.append(np.mean(rows, axis=0))
    means = np.array(means)
    ns = np.array(args.sizes, dtype=float)
    slope = np.polyfit(np.log(ns), np.log(means[:, 0]), 1)[0]
    print(f"swap count ~ n^{slope:.2f}", file=sys.stderr)
    if len(ns) > 1 and ns.min() > 2:
        beta = np.polyfit(np.log(np.log2(ns)), np.log(means[:, 1] / means[:, 0]), 1)[0]
        print(f"tournament/swap ratio ~ (log n)^{beta:.2f}", file=sys.stderr)


if __name__ == "__main__":
    main()
