"""Command line entry point: ``semiyao-kds {gen,construct,simulate,verify}``.

Exit codes: 0 success, 1 divergence from the oracle, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction

from .ann import build_all
from .cones import build_cone_family
from .scenario import ScenarioError, generate_scenario, parse_angle, parse_scenario, serialize_scenario
from .simulation import AUDITS, MODES, RunConfig, run_scenario
from .sygraph import build_static

EXIT_OK, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _angle(text: str) -> str:
    try:
        parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _load(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_scenario(text)
    except ScenarioError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_gen(args) -> int:
    scn = generate_scenario(args.n, dim=args.dim, degree=args.degree, seed=args.seed, theta=args.theta,
                            eps=args.eps, horizon=args.horizon, speed=args.speed)
    text = serialize_scenario(scn)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_construct(args) -> int:
    scn = _load(args.scenario)
    theta = args.theta or scn.theta or "pi/3"
    try:
        family = build_cone_family(scn.dim, parse_angle(theta))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    graph = build_static(scn.points, family)
    nn = build_all(scn.points, graph)
    edges = [(w, l, t, 0) for (w, l), t in sorted(graph.items())]
    table = [(p, "" if q is None else q) for p, q in sorted(nn.items())]
    undirected = {(min(w, t), max(w, t)) for (w, _), t in graph.items()}
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write_csv(os.path.join(args.out_dir, "graph.csv"), ("w", "l", "target", "t"), edges)
        _write_csv(os.path.join(args.out_dir, "nn.csv"), ("p", "nn"), table)
    else:
        out = csv.writer(sys.stdout, lineterminator="\n")
        out.writerow(("w", "l", "target", "t"))
        out.writerows(edges)
        out.writerow(())
        out.writerow(("p", "nn"))
        out.writerows(table)
    print(f"points {len(scn.points)}  cones {family.c}  directed {len(graph)}  undirected {len(undirected)}",
          file=sys.stderr)
    return EXIT_OK


def _config(args, audit: str) -> RunConfig:
    try:
        return RunConfig(mode=args.mode, until=args.until, checkpoints=args.checkpoints, audit=audit,
                         eps=None if args.eps is None else float(args.eps),
                         theta=None if args.theta is None else parse_angle(args.theta),
                         seed=args.seed, inject_fault=args.inject_fault)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _run(args, audit: str) -> int:
    scn = _load(args.scenario)
    cfg = _config(args, audit)
    try:
        sim, result = run_scenario(scn, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out_dir:
        sim.write_outputs(args.out_dir, result)
    s = result.stats
    print(f"cones {result.cones}  theta {result.theta:.6g}  events {s['u_swaps'] + s['x_swaps'] + s['tournament']}"
          f"  (u {s['u_swaps']}, x {s['x_swaps']}, tournament {s['tournament']})"
          f"  edge changes {s['edge_changes']}  checks {s['checks']}")
    if result.divergence:
        print(f"DIVERGENCE: {result.divergence}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    return _run(args, args.audit)


def cmd_verify(args) -> int:
    return _run(args, args.audit or "full")


def _run_flags(p: argparse.ArgumentParser, audit_default) -> None:
    p.add_argument("scenario", help="scenario file, or - for stdin")
    p.add_argument("--mode", choices=MODES, default="ann")
    p.add_argument("--until", type=_rational, help="end time (default: scenario horizon)")
    p.add_argument("--checkpoints", type=int, default=0, help="random oracle checkpoints")
    p.add_argument("--audit", choices=AUDITS, default=audit_default)
    p.add_argument("--eps", type=_rational)
    p.add_argument("--theta", type=_angle, help="cone angle, e.g. pi/3 or 0.5")
    p.add_argument("--out-dir", help="directory for CSV outputs")
    p.add_argument("--seed", type=int, default=0, help="seed for checkpoint sampling")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semiyao-kds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random scenario")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--dim", type=int, choices=(2, 3), default=2)
    g.add_argument("--degree", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--theta", type=_angle, default="pi/3")
    g.add_argument("--eps", type=_rational)
    g.add_argument("--horizon", type=_rational, default=Fraction(1))
    g.add_argument("--speed", type=float, default=0.25)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("construct", help="static Semi-Yao graph and NN table at t=0")
    c.add_argument("scenario")
    c.add_argument("--theta", type=_angle)
    c.add_argument("--out-dir")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("simulate", help="run the kinetic structures to the horizon")
    _run_flags(s, "off")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="simulate with oracle checks; exit 1 on divergence")
    _run_flags(v, None)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "checkpoints", 0) < 0:
        parser.error("--checkpoints must be non-negative")
    if getattr(args, "n", 0) is not None and getattr(args, "n", 0) < 0:
        parser.error("--n must be non-negative")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
