"""Brute-force references for the maintained attributes.

Only motion and cone primitives are used.  Values are computed in floating
point; any comparison closer than ``GUARD`` is redone exactly with the
right-limit rule (sign just after t, then signed id), which is the order the
kinetic structures keep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .cones import ConeFamily
from .motion import Trajectory, as_instant, project, right_sign, squared_distance_poly

GUARD = 1e-9


@dataclass
class OracleReport:
    time: float
    passed: dict = field(default_factory=dict)
    detail: Optional[str] = None

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


class Oracle:
    """O(c n^2) reference over a fixed point set."""

    def __init__(self, trajectories: Sequence[Trajectory], family: Optional[ConeFamily] = None):
        self.points = sorted(trajectories, key=lambda tr: tr.point_id)
        self.ids = [tr.point_id for tr in self.points]
        self.n = len(self.points)
        self.family = family
        deg = max((tr.degree for tr in self.points), default=0)
        dim = self.points[0].dim if self.points else 0
        self.coef = np.zeros((self.n, dim, deg + 1))
        for i, tr in enumerate(self.points):
            for j, poly in enumerate(tr.coords):
                for k, a in enumerate(poly.coeffs):
                    self.coef[i, j, k] = float(a)
        self._proj_cache: dict = {}
        self._dist_cache: dict = {}
        if family is not None:
            vecs, self.slots = [], []
            for cone in family.cones:
                row = []
                for v in list(cone.normals) + [cone.axis]:
                    row.append(len(vecs))
                    vecs.append([float(x) for x in v])
                self.slots.append(row)
            self.vecs = np.array(vecs).T   # (dim, K)
            self.exact_vecs = [v for cone in family.cones for v in list(cone.normals) + [cone.axis]]

    # ------------------------------------------------------------------ exact fallbacks

    def positions(self, t) -> np.ndarray:
        tf = float(as_instant(t).approx()) if not isinstance(t, (int, float)) else float(t)
        powers = tf ** np.arange(self.coef.shape[2])
        return self.coef @ powers

    def _proj_poly(self, i: int, k: int):
        key = (i, k)
        p = self._proj_cache.get(key)
        if p is None:
            p = self._proj_cache[key] = project(self.points[i], self.exact_vecs[k])
        return p

    def precedes(self, a: int, b: int, k: int, sign: int, t) -> bool:
        """Exact: a before b along vector k just after t (ties by signed index)."""
        s = right_sign(self._proj_poly(b, k) - self._proj_poly(a, k), as_instant(t))
        if s:
            return s > 0
        return sign * a < sign * b

    def _dist_poly(self, a: int, b: int):
        key = (min(a, b), max(a, b))
        p = self._dist_cache.get(key)
        if p is None:
            p = self._dist_cache[key] = squared_distance_poly(self.points[a], self.points[b])
        return p

    def closer(self, p: int, a: int, b: int, t) -> bool:
        """Exact: a strictly nearer to p than b just after t (ties by index)."""
        s = right_sign(self._dist_poly(p, b) - self._dist_poly(p, a), as_instant(t))
        if s:
            return s > 0
        return a < b

    # ------------------------------------------------------------------ references

    def semi_yao(self, t) -> dict:
        """``{(w_id, l): target_id}`` by direct evaluation."""
        fam = self.family
        out = {}
        n = self.n
        if n < 2:
            return out
        proj = self.positions(t) @ self.vecs     # (n, K)
        scale = GUARD * (1.0 + np.abs(proj).max())
        ids = self.ids
        for pos, cone in enumerate(fam.cones):
            l = cone.index
            slots = self.slots[pos]
            signs = cone.tie_signs
            member = np.ones((n, n), dtype=bool)
            unsure = np.zeros((n, n), dtype=bool)
            for k, sign in zip(slots[:-1], signs[:-1]):
                col = proj[:, k]
                diff = col[None, :] - col[:, None]          # q minus apex
                member &= diff > 0
                unsure |= np.abs(diff) <= scale
            np.fill_diagonal(member, False)
            np.fill_diagonal(unsure, False)
            kx, sx = slots[-1], signs[-1]
            xs = proj[:, kx]
            xm = np.where(member, xs[None, :], np.inf)
            mins = xm.min(axis=1)
            first = xm.argmin(axis=1)
            slow = unsure.any(axis=1) | ((xm <= mins[:, None] + scale).sum(axis=1) > 1)
            for w in np.nonzero(~slow & np.isfinite(mins))[0]:
                out[(ids[w], l)] = ids[first[w]]
            for w in np.nonzero(slow)[0]:
                w = int(w)
                row = member[w].copy()
                for q in np.nonzero(unsure[w])[0]:
                    row[q] = all(self.precedes(w, int(q), k, s, t) for k, s in zip(slots[:-1], signs[:-1]))
                cand = np.nonzero(row)[0]
                if len(cand) == 0:
                    continue
                vals = xs[cand]
                near = cand[vals <= vals.min() + scale]
                best = int(near[0])
                for q in near[1:]:
                    if self.precedes(int(q), best, kx, sx, t):
                        best = int(q)
                out[(ids[w], l)] = ids[best]
        return out

    def all_nn(self, t) -> dict:
        """``{p_id: nn_id}`` by direct evaluation."""
        n = self.n
        out = {}
        if n < 2:
            return out
        pos = self.positions(t)
        d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        scale = GUARD * (1.0 + d2[np.isfinite(d2)].max())
        mins = d2.min(axis=1)
        first = d2.argmin(axis=1)
        slow = (d2 <= mins[:, None] + scale).sum(axis=1) > 1
        for p in np.nonzero(~slow)[0]:
            out[self.ids[p]] = self.ids[first[p]]
        for p in np.nonzero(slow)[0]:
            p = int(p)
            row = d2[p]
            near = np.nonzero(row <= row.min() + scale)[0]
            best = int(near[0])
            for q in near[1:]:
                if self.closer(p, int(q), best, t):
                    best = int(q)
            out[self.ids[p]] = self.ids[best]
        return dict(sorted(out.items()))

    def nn_sqdist(self, t) -> dict:
        pos = self.positions(t)
        d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        return {self.ids[p]: float(d2[p].min()) for p in range(self.n)}

    def sqdist(self, a_id: int, b_id: int, t) -> float:
        ia, ib = self.ids.index(a_id), self.ids.index(b_id)
        pos = self.positions(t)
        return float(((pos[ia] - pos[ib]) ** 2).sum())


def brute_semi_yao(trajectories: Sequence[Trajectory], family: ConeFamily, t=0) -> dict:
    return Oracle(trajectories, family).semi_yao(t)


def brute_all_nn(trajectories: Sequence[Trajectory], t=0) -> dict:
    return Oracle(trajectories).all_nn(t)


def _rational_time(t) -> Fraction:
    t = as_instant(t)
    return t.lo if t.is_exact else Fraction(t.approx())


def eps_violations(oracle: Oracle, eps_nn: dict, eps, t) -> list:
    """Points p with |p, eps_nn(p)| > (1 + eps) |p, NN(p)|.

    Clear cases are settled in floating point; anything within the guard of
    the bound is decided with exact squared distances.
    """
    n = oracle.n
    if n < 2:
        return []
    e = Fraction(str(eps))
    bound = float((1 + e) ** 2)
    pos = oracle.positions(t)
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    index = {pid: i for i, pid in enumerate(oracle.ids)}
    bad = []
    for pid, qid in sorted(eps_nn.items()):
        p = index[pid]
        if qid is None:
            bad.append((pid, None))
            continue
        q = index[qid]
        best = d2[p].min()
        if d2[p, q] <= bound * best * (1 - 1e-9):
            continue
        tq = _rational_time(t)
        near = np.nonzero(d2[p] <= best * (1 + 1e-6) + GUARD)[0]
        exact_best = min(oracle._dist_poly(p, int(r))(tq) for r in near)
        if oracle._dist_poly(p, q)(tq) > (1 + e) ** 2 * exact_best:
            bad.append((pid, qid))
    return bad
