"""Run random scenarios against the oracle and report any divergence.

    python scripts/kinetic_suite.py --n 50 --runs 20 --degree 1 2 --mode ann
"""
import argparse
import sys
import time

from semiyao_kds.scenario import generate_scenario
from semiyao_kds.simulation import MODES, RunConfig, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--degree", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--mode", choices=MODES, default="ann")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--checkpoints", type=int, default=1000)
    ap.add_argument("--audit", default="full")
    args = ap.parse_args()

    failed = 0
    start = time.perf_counter()
    for degree in args.degree:
        for k in range(args.runs):
            scn = generate_scenario(args.n, dim=args.dim, degree=degree, seed=1000 * degree + k)
            cfg = RunConfig(mode=args.mode, eps=args.eps, audit=args.audit,
                            checkpoints=args.checkpoints, seed=7, log_events=False)
            _, res = run_scenario(scn, cfg)
            s = res.stats
            status = "ok" if not res.divergence else f"DIVERGED {res.divergence}"
            print(f"degree {degree} run {k:2d}: swaps {s['u_swaps'] + s['x_swaps']:6d} "
                  f"tournament {s['tournament']:6d} checks {s['checks']:5d} {status}")
            failed += bool(res.divergence)
    print(f"{failed} divergent, {time.perf_counter() - start:.1f}s", file=sys.stderr)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
