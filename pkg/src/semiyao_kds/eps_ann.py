"""All (1+eps)-nearest neighbours from the relative nearest neighbour graph.

For every cone l and canonical chain v with both sides nonempty the RNN graph
has the edge (b(v), r(v)).  N_l(p) is the multiset of r(v) over chains with
b(v) = p, kept sorted by cone-axis rank; its first entry n_l(p) is the
candidate for cone l.  Each point runs a small tournament over its candidates
(element id ``cand * c + l``); the winner is its (1+eps)-nearest neighbour.
"""
from __future__ import annotations

import math
from collections import defaultdict
from typing import Optional

from sortedcontainers import SortedList

from .cones import ConeFamily, build_cone_family
from .dktt import Dktt
from .kinetic import KIND_X, EventQueue
from .motion import squared_distance_poly
from .rbrt import NONE, ConeTree
from .sygraph import SemiYaoKDS

EPS_TAG = 1
ANGLE_GRID = tuple(math.pi / k for k in (3, 4, 6, 8, 12, 16, 24, 32, 48, 64))


def stretch_bound(family: ConeFamily) -> float:
    """Guaranteed ratio |p, n_l(p)| / |p, NN(p)| for a family: 1 / cos(max axis-to-ray angle)."""
    return 1.0 / math.cos(family.max_axis_angle())


def theta_for_eps(eps: float, d: int = 2) -> float:
    """Largest grid angle whose cone family guarantees the (1+eps) bound."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    for theta in ANGLE_GRID:
        if d == 2:
            ok = 1.0 / math.cos(theta / 2) <= 1.0 + eps
        else:
            ok = stretch_bound(build_cone_family(3, theta)) <= 1.0 + eps
        if ok:
            return theta
    raise ValueError(f"eps={eps} needs cones narrower than pi/64; use a larger eps")


class _Candidates:
    """N_l(p) for one cone: multiset counts plus an ordered view by axis rank."""

    def __init__(self, xrank):
        self.xrank = xrank
        self.count: dict = defaultdict(dict)          # b -> {r: multiplicity}
        self.sorted: dict = {}                        # b -> SortedList[(rank, r)]
        self.rev: dict = defaultdict(set)             # r -> {b}

    def add(self, b: int, r: int) -> None:
        cnt = self.count[b]
        if r in cnt:
            cnt[r] += 1
            return
        cnt[r] = 1
        sl = self.sorted.get(b)
        if sl is None:
            sl = self.sorted[b] = SortedList()
        sl.add((self.xrank[r], r))
        self.rev[r].add(b)

    def remove(self, b: int, r: int) -> None:
        cnt = self.count[b]
        if cnt[r] > 1:
            cnt[r] -= 1
            return
        del cnt[r]
        if not cnt:
            del self.count[b]
        self.sorted[b].remove((self.xrank[r], r))
        if not self.sorted[b]:
            del self.sorted[b]
        self.rev[r].discard(b)
        if not self.rev[r]:
            del self.rev[r]

    def rekey(self, r: int, old_rank: int) -> list:
        """Re-sort r after its axis rank changed from ``old_rank``."""
        owners = sorted(self.rev.get(r, ()))
        for b in owners:
            sl = self.sorted[b]
            sl.remove((old_rank, r))
            sl.add((self.xrank[r], r))
        return owners

    def first(self, b: int) -> int:
        sl = self.sorted.get(b)
        return sl[0][1] if sl else NONE


class EpsAnnKDS:
    def __init__(self, sy: SemiYaoKDS, queue: EventQueue, eps: float):
        if not sy.track_b:
            raise ValueError("the Semi-Yao structure must be built with track_b=True")
        self.sy = sy
        self.queue = queue
        self.eps = eps
        self.n = sy.n
        self.c = sy.family.c
        self._dist: dict = {}
        self.cands = []
        self.first = []
        for tree in sy.trees:
            cand = _Candidates(tree.ranks[tree.d])
            for b, r in tree.rnn_pairs().values():
                cand.add(b, r)
            self.cands.append(cand)
            self.first.append({b: cand.first(b) for b in cand.sorted})
        self.trees = [Dktt(queue, EPS_TAG, p) for p in range(self.n)]
        per_point = defaultdict(list)
        for l, firsts in enumerate(self.first):
            for b, r in firsts.items():
                per_point[b].append((r * self.c + l, self.dist_poly(b, r)))
        for p in range(self.n):
            self.trees[p].build(per_point[p])
        sy.listeners.append(self)

    def dist_poly(self, p: int, q: int):
        key = (min(p, q), max(p, q))
        poly = self._dist.get(key)
        if poly is None:
            poly = self._dist[key] = squared_distance_poly(self.sy.points[p], self.sy.points[q])
        return poly

    def on_cone_event(self, l: int, kind: int, a: int, b: int, tree: ConeTree) -> None:
        cand = self.cands[l]
        dirty = set()
        if kind == KIND_X:
            # a moved one rank later, b one rank earlier
            xr = tree.ranks[tree.d]
            dirty.update(cand.rekey(a, xr[a] - 1))
            dirty.update(cand.rekey(b, xr[b] + 1))
        for code in sorted(tree.touched):
            old_b, old_r = tree.touched[code]
            new_b = tree.bmax.get(code - tree.ONES, NONE)
            new_r = tree.rmin.get(code, NONE)
            if (old_b, old_r) == (new_b, new_r):
                continue
            if old_b != NONE and old_r != NONE:
                cand.remove(old_b, old_r)
                dirty.add(old_b)
            if new_b != NONE and new_r != NONE:
                cand.add(new_b, new_r)
                dirty.add(new_b)
            self.queue.charge(1)
        firsts = self.first[l]
        for p in sorted(dirty):
            old = firsts.get(p, NONE)
            new = cand.first(p)
            if old == new:
                continue
            if old != NONE:
                self.trees[p].delete(old * self.c + l)
            if new != NONE:
                self.trees[p].insert(new * self.c + l, self.dist_poly(p, new))
                firsts[p] = new
            else:
                del firsts[p]

    def eps_nearest(self, p: int) -> Optional[int]:
        w = self.trees[p].winner()
        return None if w is None else w // self.c

    def all_eps_nearest(self) -> dict:
        ids = self.sy.ids
        out = {}
        for p in range(self.n):
            q = self.eps_nearest(p)
            out[ids[p]] = ids[q] if q is not None else None
        return out

    def rnn_edges(self) -> list:
        """Per cone, the set of RNN edges (b, r)."""
        return [set(tree.rnn_pairs().values()) for tree in self.sy.trees]

    def audit(self) -> list:
        errors = []
        for l, tree in enumerate(self.sy.trees):
            want = defaultdict(lambda: defaultdict(int))
            for b, r in tree.rnn_pairs().values():
                want[b][r] += 1
            got = self.cands[l].count
            if {b: dict(v) for b, v in want.items()} != {b: dict(v) for b, v in got.items()}:
                errors.append(f"cone {l + 1}: candidate multisets differ from the RNN graph")
            xr = tree.ranks[tree.d]
            for b, sl in self.cands[l].sorted.items():
                if list(sl) != sorted((xr[r], r) for r in got[b]):
                    errors.append(f"cone {l + 1}: candidate order of {b} stale")
                if self.first[l].get(b, NONE) != (min(got[b], key=lambda r: xr[r]) if got[b] else NONE):
                    errors.append(f"cone {l + 1}: first candidate of {b} stale")
        for p in range(self.n):
            want = {r * self.c + l for l in range(self.c) for b, r in self.first[l].items() if b == p}
            if set(self.trees[p].val) != want:
                errors.append(f"tournament {p} holds the wrong candidates")
            errors.extend(f"tournament {p}: {e}" for e in self.trees[p].audit())
        return errors


def rnn_structure(sy_or_trees) -> dict:
    """Edge count and maximum degree of the RNN graph (summed over cones)."""
    trees = sy_or_trees.trees if hasattr(sy_or_trees, "trees") else sy_or_trees
    degree = defaultdict(int)
    edges = 0
    for tree in trees:
        es = set(tree.rnn_pairs().values())
        edges += len(es)
        for b, r in es:
            degree[b] += 1
            degree[r] += 1
    return {"edges": edges, "max_degree": max(degree.values(), default=0)}
