"""Run a scenario through the kinetic structures and compare with the oracle."""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .ann import AnnKDS
from .cones import build_cone_family
from .eps_ann import EpsAnnKDS, theta_for_eps
from .kinetic import KIND_NAMES, KIND_TOURNAMENT, EventQueue
from .motion import Instant, as_instant, rational_between
from .oracle import Oracle, OracleReport, eps_violations
from .rbrt import NONE
from .scenario import Scenario
from .sygraph import SemiYaoKDS

MODES = ("semi-yao", "ann", "eps-ann", "all")
AUDITS = ("off", "light", "full")


@dataclass
class RunConfig:
    mode: str = "ann"
    until: Optional[Fraction] = None         # defaults to the scenario horizon
    checkpoints: int = 0                      # random oracle checkpoints
    audit: str = "off"                        # off | light | full
    eps: Optional[float] = None
    check_eps: tuple = ()                     # extra eps values checked against the same structure
    theta: Optional[float] = None
    seed: int = 0
    delta: Fraction = Fraction(1, 10**7)      # offset of event-boundary checkpoints
    structural_every_event: bool = False
    log_events: bool = True
    inject_fault: bool = False
    stop_on_divergence: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.audit not in AUDITS:
            raise ValueError(f"unknown audit level {self.audit!r}")


@dataclass
class RunResult:
    stats: dict
    reports: list = field(default_factory=list)
    divergence: Optional[str] = None
    theta: float = 0.0
    cones: int = 0
    events: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.divergence is None


def _fmt_time(t) -> str:
    return f"{float(as_instant(t).approx()):.12g}"


def _first_diff(want: dict, got: dict) -> Optional[tuple]:
    for key in sorted(set(want) | set(got), key=lambda k: (str(type(k)), k)):
        if want.get(key) != got.get(key):
            return key, want.get(key), got.get(key)
    return None


class Simulation:
    def __init__(self, scenario: Scenario, config: RunConfig):
        self.scn = scenario
        self.cfg = config
        d = scenario.dim
        eps = config.eps if config.eps is not None else (float(scenario.eps) if scenario.eps is not None else None)
        self.eps = eps
        use_eps = config.mode in ("eps-ann", "all")
        if use_eps and eps is None:
            raise ValueError("eps-ann mode needs eps (flag or scenario header)")
        theta = config.theta if config.theta is not None else scenario.theta_value
        if theta is None:
            theta = math.pi / 3
        if use_eps:
            theta = min(theta, theta_for_eps(eps, d))
        self.theta = theta
        self.family = build_cone_family(d, theta, for_nn=True)
        self.queue = EventQueue(0, locality_limit=2 * self.family.c * (d + 1), log_events=config.log_events)
        self.sy = SemiYaoKDS(scenario.points, self.family, self.queue, track_b=use_eps)
        self.ann = AnnKDS(self.sy, self.queue) if config.mode in ("ann", "all") else None
        self.epsk = EpsAnnKDS(self.sy, self.queue, eps) if use_eps else None
        self.oracle = Oracle(scenario.points, self.family)
        self.reports: list = []
        self.divergence: Optional[str] = None
        if config.inject_fault:
            self._corrupt()

    # ------------------------------------------------------------------ fault injection

    def _corrupt(self) -> None:
        """Overwrite one r(v) aggregate with a wrong point and re-derive a target from it."""
        for tree in self.sy.trees:
            for w in range(tree.n):
                tgt = tree.target[w]
                if tgt == NONE:
                    continue
                for code in tree.link[w]:
                    if tree.rmin.get(code) == tgt:
                        wrong = w  # the apex itself never lies in its own cone
                        tree.rmin[code] = wrong
                        tree.retarget(w, wrong)
                        return

    # ------------------------------------------------------------------ checks

    def check(self, t, structure: bool = False) -> OracleReport:
        rep = OracleReport(time=float(as_instant(t).approx()))
        detail = None
        want = self.oracle.semi_yao(t)
        got = self.sy.snapshot()
        rep.passed["semi-yao"] = want == got
        if want != got:
            key, a, b = _first_diff(want, got)
            detail = f"semi-yao at t={_fmt_time(t)}: point {key[0]} cone {key[1]} expected {a} got {b}"
        if self.ann is not None:
            want = self.oracle.all_nn(t)
            got = self.ann.all_nearest()
            rep.passed["nn"] = want == got
            if want != got and detail is None:
                key, a, b = _first_diff(want, got)
                detail = f"nn at t={_fmt_time(t)}: point {key} expected {a} got {b}"
        if self.epsk is not None:
            table = self.epsk.all_eps_nearest()
            for e in (self.eps,) + tuple(self.cfg.check_eps):
                bad = eps_violations(self.oracle, table, e, t)
                rep.passed[f"eps={e}"] = not bad
                if bad and detail is None:
                    detail = f"eps={e} at t={_fmt_time(t)}: point {bad[0][0]} candidate {bad[0][1]} too far"
        if structure:
            errs = self.structural_audit()
            rep.passed["structure"] = not errs
            if errs and detail is None:
                detail = f"structure at t={_fmt_time(t)}: {errs[0]}"
        rep.detail = detail
        self.reports.append(rep)
        if detail is not None and self.divergence is None:
            self.divergence = detail
        return rep

    def structural_audit(self) -> list:
        errs = self.sy.audit()
        if self.ann is not None:
            errs += self.ann.audit()
        if self.epsk is not None:
            errs += self.epsk.audit()
        return errs

    # ------------------------------------------------------------------ run

    def random_checkpoints(self, horizon: Fraction) -> list:
        rng = np.random.default_rng(self.cfg.seed)
        k = self.cfg.checkpoints
        den = 1 << 40
        return sorted(Fraction(int(x), den) * horizon for x in rng.integers(0, den + 1, size=k))

    def run(self) -> RunResult:
        cfg = self.cfg
        horizon = Fraction(cfg.until) if cfg.until is not None else self.scn.horizon
        q = self.queue
        checking = cfg.audit != "off"
        at_events = cfg.audit == "full"
        pending = self.random_checkpoints(horizon) if checking else []
        if checking:
            self.check(Fraction(0))
        idx = 0
        stop = False
        while not stop:
            nxt = q.peek_time()
            if nxt is None or horizon < nxt:
                break
            while idx < len(pending) and pending[idx] < nxt:
                self.check(pending[idx])
                idx += 1
                if self.divergence and cfg.stop_on_divergence:
                    stop = True
                    break
            if stop:
                break
            t, _ = q.advance_to_next_event()
            n2 = q.peek_time()
            if n2 is not None and n2 == t:
                continue              # finish the cascade at this instant first
            if cfg.structural_every_event:
                errs = self.structural_audit()
                if errs and self.divergence is None:
                    self.divergence = f"structure after event at t={_fmt_time(t)}: {errs[0]}"
            if at_events:
                upper = n2 if n2 is not None and not horizon < n2 else as_instant(horizon)
                tc = rational_between(t, upper, cfg.delta)
                if tc is not None:
                    self.check(tc)
            if self.divergence and cfg.stop_on_divergence:
                break
        if not stop and not (self.divergence and cfg.stop_on_divergence):
            while idx < len(pending):
                self.check(pending[idx])
                idx += 1
        if q.t_now < horizon:
            q.t_now = as_instant(horizon)
        if at_events and not (self.divergence and cfg.stop_on_divergence):
            self.check(horizon, structure=True)
        stats = q.stats.as_row()
        stats["n"] = self.sy.n
        stats["cones"] = self.family.c
        stats["checks"] = len(self.reports)
        return RunResult(stats=stats, reports=self.reports, divergence=self.divergence,
                         theta=self.theta, cones=self.family.c, events=q.log or [])

    # ------------------------------------------------------------------ output

    def event_rows(self) -> list:
        ids = self.sy.ids
        c = self.family.c
        rows = []
        for t, _name, key, changes in self.queue.log or []:
            kind = key[0]
            if kind == KIND_TOURNAMENT:
                tag, owner, a, b = key[1], key[2], key[3], key[4]
                if tag == 1:
                    a, b = a // c, b // c
                rows.append((_fmt_time(t), "tournament", "nn" if tag == 0 else "eps", ids[owner],
                             ids[a], ids[b], changes))
            else:
                rows.append((_fmt_time(t), KIND_NAMES[kind], key[1] + 1, key[2], ids[key[3]], ids[key[4]], changes))
        return rows

    def graph_rows(self) -> list:
        t = _fmt_time(self.queue.t_now)
        ids = self.sy.ids
        return [(ids[w], l + 1, ids[tg], t) for w, l, tg in self.sy.directed_edges()]

    def nn_rows(self) -> list:
        if self.ann is None:
            return []
        t = self.queue.t_now
        tf = _fmt_time(t)
        rows = []
        for p in range(self.sy.n):
            q = self.ann.nearest(p)
            if q is None:
                rows.append((self.sy.ids[p], "", "", tf))
                continue
            d2 = self.ann.dist_poly(p, q)(Fraction(t.approx()) if not t.is_exact else t.lo)
            rows.append((self.sy.ids[p], self.sy.ids[q], f"{float(d2):.12g}", tf))
        return rows

    def eps_rows(self) -> list:
        if self.epsk is None:
            return []
        t = self.queue.t_now
        tf = _fmt_time(t)
        nn = self.oracle.nn_sqdist(t)
        rows = []
        for p in range(self.sy.n):
            q = self.epsk.eps_nearest(p)
            pid = self.sy.ids[p]
            if q is None:
                rows.append((pid, "", "", tf))
                continue
            d2 = self.oracle.sqdist(pid, self.sy.ids[q], t)
            ratio = math.sqrt(d2 / nn[pid]) if nn[pid] > 0 else (1.0 if d2 == 0 else math.inf)
            rows.append((pid, self.sy.ids[q], f"{ratio:.12g}", tf))
        return rows

    def write_outputs(self, out_dir: str, result: RunResult) -> list:
        os.makedirs(out_dir, exist_ok=True)
        written = []

        def dump(name, header, rows):
            path = os.path.join(out_dir, name)
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            written.append(path)

        dump("events.csv", ("t", "kind", "cone", "axis", "id_a", "id_b", "changes_emitted"), self.event_rows())
        dump("graph.csv", ("w", "l", "target", "t"), self.graph_rows())
        if self.ann is not None:
            dump("nn.csv", ("p", "nn", "sqdist", "t"), self.nn_rows())
        if self.epsk is not None:
            dump("eps.csv", ("p", "eps_nn", "ratio", "t"), self.eps_rows())
        summary = dict(result.stats)
        summary["theta"] = f"{result.theta:.12g}"
        summary["divergence"] = result.divergence or ""
        dump("summary.csv", tuple(summary), [tuple(summary.values())])
        dump("checks.csv", ("t", "passed", "detail"),
             [(f"{r.time:.12g}", int(r.ok), r.detail or "") for r in result.reports])
        return written


def run_scenario(scenario: Scenario, config: RunConfig) -> tuple:
    sim = Simulation(scenario, config)
    return sim, sim.run()


def replay_check(scenario: Scenario, checkpoint_times: Sequence, mode: str = "all", eps=None) -> list:
    """Run the full structure and compare with the oracle at the given times."""
    cfg = RunConfig(mode=mode, eps=eps if eps is not None else (float(scenario.eps) if scenario.eps else 0.5),
                    audit="light", stop_on_divergence=False, log_events=False)
    sim = Simulation(scenario, cfg)
    times = sorted(Fraction(t) for t in checkpoint_times)
    q = sim.queue
    out = []
    for t in times:
        q.run_until(t)
        out.append(sim.check(t))
    return out
