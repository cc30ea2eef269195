"""All nearest neighbours from the kinetic Semi-Yao graph.

Each point keeps a tournament over its incident Semi-Yao edges, valued by
squared distance; the winner is its nearest neighbour.  A directed target may
exist in both directions, so undirected edges are reference counted.
"""
from __future__ import annotations

from collections import Counter
from typing import Optional

from .dktt import Dktt
from .kinetic import EventQueue
from .motion import as_instant, right_sign, squared_distance_poly
from .sygraph import EdgeChange, SemiYaoKDS

ANN_TAG = 0


class AnnKDS:
    def __init__(self, sy: SemiYaoKDS, queue: EventQueue):
        self.sy = sy
        self.queue = queue
        self.n = sy.n
        self.points = sy.points
        self.ref: Counter = Counter()
        self.updates = [0] * self.n        # insertions and deletions per tournament
        self._dist: dict = {}
        self.trees = [Dktt(queue, ANN_TAG, p) for p in range(self.n)]
        inc = [set() for _ in range(self.n)]
        for w, _, t in sy.directed_edges():
            key = (min(w, t), max(w, t))
            self.ref[key] += 1
            inc[w].add(t)
            inc[t].add(w)
        for p in range(self.n):
            self.trees[p].build((q, self.dist_poly(p, q)) for q in inc[p])
        sy.listeners.append(self)

    def dist_poly(self, p: int, q: int):
        key = (min(p, q), max(p, q))
        poly = self._dist.get(key)
        if poly is None:
            poly = self._dist[key] = squared_distance_poly(self.points[p], self.points[q])
        return poly

    def on_edge_change(self, ch: EdgeChange) -> None:
        a, b = ch.w, ch.target
        key = (min(a, b), max(a, b))
        if ch.kind == "insert":
            self.ref[key] += 1
            if self.ref[key] == 1:
                self.trees[a].insert(b, self.dist_poly(a, b))
                self.trees[b].insert(a, self.dist_poly(a, b))
                self.updates[a] += 1
                self.updates[b] += 1
        else:
            if self.ref[key] <= 0:
                raise AssertionError(f"delete of absent edge {key}")
            self.ref[key] -= 1
            if self.ref[key] == 0:
                del self.ref[key]
                self.trees[a].delete(b)
                self.trees[b].delete(a)
                self.updates[a] += 1
                self.updates[b] += 1

    def incidence(self, p: int) -> set:
        return set(self.trees[p].val)

    def nearest(self, p: int) -> Optional[int]:
        return self.trees[p].winner()

    def all_nearest(self) -> dict:
        """``{p_id: nn_id}`` (None for an isolated point)."""
        ids = self.sy.ids
        out = {}
        for p in range(self.n):
            w = self.trees[p].winner()
            out[ids[p]] = ids[w] if w is not None else None
        return out

    def closest_pair(self) -> Optional[tuple]:
        """Pair of ids at minimum distance now, ties by (min id, max id)."""
        best = None
        t = self.queue.t_now
        for p in range(self.n):
            q = self.trees[p].winner()
            if q is None:
                continue
            cand = (min(p, q), max(p, q))
            if best is None:
                best = cand
                continue
            s = right_sign(self.dist_poly(*best) - self.dist_poly(*cand), t)
            if s > 0 or (s == 0 and cand < best):
                best = cand
        if best is None:
            return None
        ids = self.sy.ids
        return ids[best[0]], ids[best[1]]

    def audit(self) -> list:
        errors = []
        inc = [set() for _ in range(self.n)]
        for w, _, t in self.sy.directed_edges():
            inc[w].add(t)
            inc[t].add(w)
        for p in range(self.n):
            if inc[p] != self.incidence(p):
                errors.append(f"incidence of {p} differs from the graph")
            errors.extend(f"tournament {p}: {e}" for e in self.trees[p].audit())
        return errors


def build_all(trajectories, graph: dict, t=0) -> dict:
    """NN table ``{p_id: nn_id}`` from a Semi-Yao snapshot ``{(w_id, l): target_id}``.

    Each point scans its incident edges; distances are compared exactly just
    after ``t``, ties going to the lower id.
    """
    by_id = {tr.point_id: tr for tr in trajectories}
    inc = {pid: set() for pid in by_id}
    for (w, _), tgt in graph.items():
        inc[w].add(tgt)
        inc[tgt].add(w)
    t = as_instant(t)
    out = {}
    for p in sorted(by_id):
        best = best_d = None
        for q in sorted(inc[p]):
            d = squared_distance_poly(by_id[p], by_id[q])
            if best is None or right_sign(best_d - d, t) > 0:
                best, best_d = q, d
        out[p] = best
    return out
