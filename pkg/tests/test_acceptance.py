"""Acceptance suite: one test per criterion, with a pass/fail summary line each.

Run with ``pytest tests/test_acceptance.py`` (summary printed at the end of the
session) or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from semiyao_kds.ann import build_all
from semiyao_kds.cones import axis_key, build_cone_family, cone_index, contains
from semiyao_kds.dktt import Dktt
from semiyao_kds.eps_ann import EpsAnnKDS, rnn_structure
from semiyao_kds.kinetic import EventQueue, LocalityError
from semiyao_kds.motion import Polynomial, right_sign
from semiyao_kds.oracle import brute_all_nn, brute_semi_yao
from semiyao_kds.scenario import generate_scenario, serialize_scenario
from semiyao_kds.simulation import RunConfig, run_scenario
from semiyao_kds.sygraph import SemiYaoKDS, build_static

TITLES = {
    1: "static correctness",
    2: "nearest-neighbour graph contained in Semi-Yao graph",
    3: "nearest neighbour has minimum axis coordinate in its cone",
    4: "kinetic exactness",
    5: "(1+eps)-ANN guarantee",
    6: "locality",
    7: "event scaling",
    8: "tournament fuzz",
    9: "RNN structure bounds",
    10: "determinism",
}
RESULTS: dict = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    assert ok, f"criterion {n} ({TITLES[n]}): {detail}"


def summary_lines() -> list:
    out = []
    for n in sorted(TITLES):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            out.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {TITLES[n]}: {detail}")
        else:
            out.append(f"criterion {n:2d} NOT RUN  {TITLES[n]}")
    return out


# ---------------------------------------------------------------------------
# 1-2: static construction

STATIC_SUITE = [(2, 200), (3, 100)]


@pytest.fixture(scope="module")
def static_runs():
    runs = []
    start = time.perf_counter()
    for dim, n in STATIC_SUITE:
        fam = build_cone_family(dim, math.pi / 3)
        for seed in range(50):
            scn = generate_scenario(n, dim=dim, degree=0, seed=10_000 + 100 * dim + seed)
            graph = build_static(scn.points, fam)
            table = build_all(scn.points, graph)
            runs.append((dim, seed, scn, graph, table, brute_semi_yao(scn.points, fam), brute_all_nn(scn.points)))
    return runs, time.perf_counter() - start


def test_static_correctness(static_runs):
    runs, elapsed = static_runs
    bad = [(dim, seed) for dim, seed, _, g, tab, want_g, want_tab in runs if g != want_g or tab != want_tab]
    cones = build_cone_family(3).c
    record(1, not bad and elapsed < 60 and cones == 48,
           f"{len(runs)} instances, {len(bad)} mismatches, 3D cones {cones}, {elapsed:.1f}s (limit 60s)")


def test_semi_yao_contains_nearest_neighbour_graph(static_runs):
    runs, _ = static_runs
    violations = 0
    for *_, g, _, _, want_tab in runs:
        und = {frozenset((w, t)) for (w, _), t in g.items()}
        violations += sum(frozenset((p, q)) not in und for p, q in want_tab.items())
    record(2, violations == 0, f"{len(runs)} instances, {violations} violations")


# ---------------------------------------------------------------------------
# 3: the nearest neighbour in a cone has the minimum axis coordinate there


def _check_cone_minimum(fam, pts) -> int:
    """Violations over pairs q -> p = NN(q) with q in C_l(p)."""
    n = len(pts)
    sq = [[sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])) for j in range(n)] for i in range(n)]
    bad = 0
    for q in range(n):
        p = min((j for j in range(n) if j != q), key=lambda j: (sq[q][j], j))
        l = cone_index(fam, pts[p], pts[q], p, q)
        cone = fam.cone(l)
        sign = cone.tie_signs[-1]

        def key(r):
            return axis_key(sum(a * u for a, u in zip(pts[r], cone.axis)), r, sign)
        members = [r for r in range(n) if r != p and contains(fam, l, pts[p], pts[r], p, r)]
        if min(members, key=key) != q:
            bad += 1
    return bad


def test_nearest_neighbour_has_minimum_axis_coordinate():
    rng = random.Random(3)
    violations, instances = 0, 0
    families = [build_cone_family(2, math.pi / k) for k in (3, 4, 6)] + [build_cone_family(3, math.pi / 3)]
    for i in range(500):
        fam = families[i % len(families)]
        n = rng.randint(2, 24)
        pts = [tuple(F(rng.randint(0, 1000)) for _ in range(fam.dim)) for _ in range(n)]
        violations += _check_cone_minimum(fam, pts)
        instances += 1
    record(3, violations == 0, f"{instances} instances, {violations} violations")


# ---------------------------------------------------------------------------
# 4-6: kinetic suite

KINETIC_N, KINETIC_SCENARIOS, KINETIC_CHECKPOINTS = 50, 20, 1000


def kinetic_scenarios():
    for degree in (1, 2):
        for k in range(KINETIC_SCENARIOS):
            yield degree, k, generate_scenario(KINETIC_N, dim=2, degree=degree, seed=1000 * degree + k, horizon=1)


def _run(scn, **kw):
    try:
        _, res = run_scenario(scn, RunConfig(audit="full", checkpoints=KINETIC_CHECKPOINTS, seed=7,
                                             log_events=False, **kw))
        return res.divergence, res.stats
    except LocalityError as exc:
        return f"locality: {exc}", None


@pytest.fixture(scope="module")
def kinetic_runs():
    out = {"nn": [], "eps": []}
    start = time.perf_counter()
    for degree, k, scn in kinetic_scenarios():
        out["nn"].append((degree, k) + _run(scn, mode="ann"))
    out["nn_time"] = time.perf_counter() - start
    for degree, k, scn in kinetic_scenarios():
        for eps, extra in ((0.2, (0.5,)), (0.1, ())):
            out["eps"].append((degree, k, eps) + _run(scn, mode="eps-ann", eps=eps, check_eps=extra))
    return out


def test_kinetic_exactness(kinetic_runs):
    runs, elapsed = kinetic_runs["nn"], kinetic_runs["nn_time"]
    bad = [(s, k, div) for s, k, div, _ in runs if div]
    checks = sum(st["checks"] for *_, st in runs if st)
    events = sum(st["u_swaps"] + st["x_swaps"] + st["tournament"] for *_, st in runs if st)
    detail = (f"{len(runs)} scenarios, {events} events, {checks} oracle checks, {len(bad)} divergent, "
              f"{elapsed:.0f}s (limit 300s)")
    if bad:
        detail += f"; first: degree {bad[0][0]} #{bad[0][1]}: {bad[0][2]}"
    record(4, not bad and elapsed < 300, detail)


def test_eps_guarantee(kinetic_runs):
    runs = kinetic_runs["eps"]
    bad = [(s, k, e, div) for s, k, e, div, _ in runs if div]
    checks = sum(st["checks"] for *_, st in runs if st)
    detail = f"eps 0.1/0.2/0.5 on {len(runs) // 2} scenarios, {checks} checkpoints, {len(bad)} divergent"
    if bad:
        detail += f"; first: {bad[0]}"
    record(5, not bad, detail)


def test_locality(kinetic_runs):
    worst, limit_ok, failures = 0, True, 0
    for *_, div, st in kinetic_runs["nn"] + kinetic_runs["eps"]:
        if st is None:
            failures += 1
            continue
        worst = max(worst, st["max_point_certs"] / (2 * st["cones"] * 3))
    limit_ok = failures == 0 and worst <= 1
    record(6, limit_ok, f"max order certificates per point at {worst:.2f} of 2c(d+1), {failures} runs over the limit")


# ---------------------------------------------------------------------------
# 7: event scaling

SCALING_N = (16, 32, 64, 128)


def scaling_rows():
    rows = []
    for n in SCALING_N:
        for k in range(10):
            scn = generate_scenario(n, dim=2, degree=1, seed=50_000 + 100 * n + k)
            _, res = run_scenario(scn, RunConfig(mode="ann", audit="off", log_events=False))
            rows.append((n, res.stats["u_swaps"] + res.stats["x_swaps"], res.stats["tournament"]))
    return rows


def fit_scaling(rows):
    ns = np.array(SCALING_N, dtype=float)
    swaps = np.array([np.mean([s for n, s, _ in rows if n == m]) for m in SCALING_N])
    tourn = np.array([np.mean([t for n, _, t in rows if n == m]) for m in SCALING_N])
    exponent = np.polyfit(np.log(ns), np.log(swaps), 1)[0]
    ratio = tourn / swaps
    # ratio ~ C (log n)^beta; growth no faster than C log n means beta <= 1
    beta = np.polyfit(np.log(np.log2(ns)), np.log(ratio), 1)[0]
    return exponent, beta, ratio


def test_event_scaling():
    exponent, beta, ratio = fit_scaling(scaling_rows())
    ok = 1.5 <= exponent <= 2.5 and beta <= 1.0
    record(7, ok, f"swap exponent {exponent:.2f} (want 1.5..2.5); tournament/swap ratios "
                  f"{', '.join(f'{r:.3f}' for r in ratio)}, log-power {beta:.2f} (want <= 1)")


# ---------------------------------------------------------------------------
# 8: tournament fuzz


def _argmin(tree, t):
    best = None
    for e in sorted(tree.val):
        if best is None:
            best = e
            continue
        s = right_sign(tree.val[best] - tree.val[e], t)
        if s > 0 or (s == 0 and e < best):
            best = e
    return best


def test_tournament_fuzz():
    rng = random.Random(8)
    ops = []
    for _ in range(10_000):
        r = rng.random()
        ops.append("ins" if r < 0.4 else "del" if r < 0.7 else "adv")
    steps = [F(rng.randint(1, 64), 1024) for op in ops if op == "adv"]
    horizon = sum(steps)
    samples = sorted(F(rng.randint(1, 10**9), 10**9) * horizon for _ in range(1000))
    q = EventQueue()
    tree = Dktt(q)
    mismatches = {"events": 0, "samples": 0, "ops": 0}
    checked = {"events": 0, "samples": 0}

    def at_event(t, _cert):
        if q.peek_time() == t:
            return
        checked["events"] += 1
        mismatches["events"] += tree.winner() != _argmin(tree, t)

    def at_sample(t):
        checked["samples"] += 1
        mismatches["samples"] += tree.winner() != _argmin(tree, t)

    def poly():
        # a + b (t - now) + c (t - now)^2, so fresh elements still cross the others
        a, b, c = (F(rng.randint(-64, 64), 16) for _ in range(3))
        c *= rng.randint(0, 1)
        n = q.t_now.lo
        return Polynomial([a - b * n + c * n * n, b - 2 * c * n, c])

    nxt, now, si, step = 0, F(0), 0, iter(steps)
    for op in ops:
        if len(tree.val) > 64 and op == "ins":
            op = "del"
        if op == "ins" or not tree.val:
            tree.insert(nxt, poly())
            nxt += 1
        elif op == "del":
            tree.delete(rng.choice(sorted(tree.val)))
        else:
            now += next(step)
            cps = []
            while si < len(samples) and samples[si] <= now:
                cps.append(samples[si])
                si += 1
            q.run_until(now, cps, at_sample, at_event)
        mismatches["ops"] += tree.winner() != _argmin(tree, q.t_now)
    errors = tree.audit()
    total = sum(mismatches.values())
    record(8, total == 0 and not errors and checked["samples"] == 1000,
           f"10000 ops, {checked['events']} event checks, {checked['samples']} sample times, "
           f"{total} mismatches, audit {'clean' if not errors else errors[0]}")


# ---------------------------------------------------------------------------
# 9: RNN structure


def test_rnn_structure():
    worst_e, worst_d, errors, instances = 0.0, 0.0, [], 0
    for dim in (2, 3):
        fam = build_cone_family(dim, math.pi / 3)
        for n in (64, 256):
            for k in range(3):
                scn = generate_scenario(n, dim=dim, degree=1, seed=70_000 + 1000 * dim + 10 * n + k)
                q = EventQueue()
                sy = SemiYaoKDS(scn.points, fam, q, track_b=True)
                eps = EpsAnnKDS(sy, q, 0.5)
                if dim == 2:
                    q.run_until(F(1, 2))      # also audit a mid-run state
                st = rnn_structure(sy)
                lg = math.ceil(math.log2(n)) + 1
                worst_e = max(worst_e, st["edges"] / (n * lg ** (dim - 1) * fam.c))
                worst_d = max(worst_d, st["max_degree"] / (lg ** dim * fam.c))
                errors += sy.audit() + eps.audit()
                instances += 1
    record(9, worst_e <= 1 and worst_d <= 1 and not errors,
           f"{instances} instances; edges at {worst_e:.3f} of bound, max degree at {worst_d:.3f} of bound, "
           f"audit {'clean' if not errors else errors[0]}")


# ---------------------------------------------------------------------------
# 10: determinism


def _cli_outputs(path, out_dir, hash_seed):
    env = dict(os.environ, PYTHONHASHSEED=str(hash_seed))
    cmd = [sys.executable, "-m", "semiyao_kds", "verify", path, "--mode", "all", "--eps", "1/5",
           "--checkpoints", "200", "--out-dir", out_dir]
    subprocess.run(cmd, check=True, env=env, capture_output=True)
    return {f: open(os.path.join(out_dir, f), "rb").read() for f in sorted(os.listdir(out_dir))}


def test_determinism(tmp_path):
    differing, compared = [], 0
    suites = [generate_scenario(KINETIC_N, degree=s, seed=1000 * s) for s in (1, 2)]
    suites.append(generate_scenario(32, degree=1, seed=50_000 + 3200))
    suites.append(generate_scenario(20, dim=3, degree=2, seed=5))
    for i, scn in enumerate(suites):
        outs = []
        for rep in range(2):
            sim, res = run_scenario(scn, RunConfig(mode="all", eps=0.2, audit="full", checkpoints=200))
            d = tmp_path / f"s{i}_{rep}"
            sim.write_outputs(str(d), res)
            outs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())})
        path = tmp_path / f"s{i}.txt"
        path.write_text(serialize_scenario(scn))
        outs.append(_cli_outputs(str(path), str(tmp_path / f"cli{i}_a"), 1))
        outs.append(_cli_outputs(str(path), str(tmp_path / f"cli{i}_b"), 2))
        for name in outs[0]:
            compared += 1
            if outs[0][name] != outs[1][name]:
                differing.append(f"scenario {i} {name} (in-process)")
        for name in outs[2]:
            compared += 1
            if outs[2][name] != outs[3][name] or outs[2][name] != outs[0].get(name):
                differing.append(f"scenario {i} {name} (CLI)")
    record(10, not differing, f"{compared} CSV files compared, {len(differing)} differ"
                              + (f"; first: {differing[0]}" if differing else ""))


if __name__ == "__main__":
    code = pytest.main([__file__, "-q"])
    sys.exit(code)
