"""Semi-Yao graph: static construction and kinetic maintenance.

Points are handled internally as indices ``0..n-1`` in increasing id order, so
index order and id order agree for every tie-break.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .cones import ConeFamily
from .kinetic import KIND_U, KIND_X, EventQueue, KineticSortedList, sort_right_limit, taylor_key
from .motion import Q, Instant, Trajectory, as_instant, project
from .rbrt import NONE, ConeTree


@dataclass(frozen=True)
class EdgeChange:
    kind: str          # "insert" or "delete"
    w: int             # source index
    target: int        # target index
    cone: int
    time: Instant


def index_points(trajectories: Sequence[Trajectory]) -> list:
    """Trajectories sorted by id; raises on duplicate ids or mixed dimensions."""
    pts = sorted(trajectories, key=lambda tr: tr.point_id)
    for a, b in zip(pts, pts[1:]):
        if a.point_id == b.point_id:
            raise ValueError(f"duplicate point id {a.point_id}")
    if len({tr.dim for tr in pts}) > 1:
        raise ValueError("trajectories of different dimensions")
    return pts


def _axis_polys(points, vec) -> dict:
    return {i: project(tr, vec) for i, tr in enumerate(points)}


def _cone_axes(cone) -> list:
    return list(cone.normals) + [cone.axis]


def build_static(trajectories: Sequence[Trajectory], family: ConeFamily, t=0) -> dict:
    """Semi-Yao targets at time t as ``{(w_id, l): target_id}``."""
    pts = index_points(trajectories)
    ids = [tr.point_id for tr in pts]
    n = len(pts)
    out = {}
    if n < 2:
        return out
    t = as_instant(t)
    if t.is_exact:
        # Taylor coefficients at t, per point and coordinate; projecting them
        # gives each point's right-limit sort key along any vector directly
        width = max(tr.degree for tr in pts) + 1
        taylor = [[taylor_key(c, t.lo) + (0,) * width for c in tr.coords] for tr in pts]

        def sort_axis(vec, sign):
            vec = [Q(u) for u in vec]
            keys = [tuple(sum(u * tc[k] for u, tc in zip(vec, taylor[i]) if u) for k in range(width))
                    + (sign * i,) for i in range(n)]
            return sorted(range(n), key=keys.__getitem__)
    else:
        def sort_axis(vec, sign):
            return sort_right_limit(range(n), _axis_polys(pts, vec), sign, t)
    for cone in family.cones:
        orders, ranks = [], []
        for vec, sign in zip(_cone_axes(cone), cone.tie_signs):
            order = sort_axis(vec, sign)
            orders.append(order)
            ranks.append({p: k for k, p in enumerate(order)})
        tree = ConeTree(ranks, orders, track=False)
        for w, tgt in enumerate(tree.target):
            if tgt != NONE:
                out[(ids[w], cone.index)] = ids[tgt]
    return out


class SemiYaoKDS:
    """Kinetic Semi-Yao graph over all cones of a family.

    ``listeners`` may define ``on_edge_change(change)`` and
    ``on_cone_event(l, kind, p, q, tree)``; the latter runs after every swap
    (with the tree's change log) and is how the RNN module follows aggregates.
    """

    def __init__(self, trajectories: Sequence[Trajectory], family: ConeFamily, queue: EventQueue,
                 track_b: bool = False, listeners: Sequence = ()):
        self.points = index_points(trajectories)
        self.ids = [tr.point_id for tr in self.points]
        self.n = len(self.points)
        self.family = family
        self.queue = queue
        self.listeners = list(listeners)
        self.track_b = track_b
        self.trees: list = []
        self.lists: list = []
        t0 = queue.t_now
        for l, cone in enumerate(family.cones):
            axes = _cone_axes(cone)
            lists = []
            for a, (vec, sign) in enumerate(zip(axes, cone.tie_signs)):
                polys = _axis_polys(self.points, vec)
                order = sort_right_limit(range(self.n), polys, sign, t0)
                kind = KIND_X if a == len(axes) - 1 else KIND_U
                lists.append(KineticSortedList(order, polys, sign, kind, l, a, queue,
                                               on_swap=self._swap_handler(l, a, kind)))
            tree = ConeTree([L.pos for L in lists], [L.order for L in lists],
                            track=True, track_b=track_b, charge=queue.charge)
            tree.touched.clear()
            self.trees.append(tree)
            self.lists.append(lists)

    def _swap_handler(self, l: int, axis: int, kind: int):
        def handle(i, a, b):
            tree = self.trees[l]
            if kind == KIND_X:
                changes = tree.x_swap(a, b)
            else:
                changes = tree.u_swap(axis, a, b)
            emitted = self._emit(l, changes)
            for lis in self.listeners:
                hook = getattr(lis, "on_cone_event", None)
                if hook is not None:
                    hook(l, kind, a, b, tree)
            tree.touched.clear()
            return emitted
        return handle

    def _emit(self, l: int, changes) -> int:
        t = self.queue.t_now
        out = []
        for w, old, new in changes:
            if old != NONE:
                out.append(EdgeChange("delete", w, old, l + 1, t))
            if new != NONE:
                out.append(EdgeChange("insert", w, new, l + 1, t))
        for ch in out:
            for lis in self.listeners:
                hook = getattr(lis, "on_edge_change", None)
                if hook is not None:
                    hook(ch)
        return len(out)

    def target(self, w: int, l: int) -> int:
        return self.trees[l].target[w]

    def directed_edges(self):
        """(w, position, target) index triples; the cone label is position + 1."""
        for l, tree in enumerate(self.trees):
            for w, tgt in enumerate(tree.target):
                if tgt != NONE:
                    yield w, l, tgt

    def snapshot(self) -> dict:
        """Current targets as ``{(w_id, l): target_id}``."""
        ids = self.ids
        return {(ids[w], l + 1): ids[t] for w, l, t in self.directed_edges()}

    def audit(self) -> list:
        """Check list order against the right-limit order and every tree against a rebuild."""
        errors = []
        t = self.queue.t_now
        for l, (lists, tree) in enumerate(zip(self.lists, self.trees)):
            for a, L in enumerate(lists):
                want = sort_right_limit(range(self.n), L.polys, L.tie_sign, t)
                if want != L.order:
                    errors.append(f"cone {l + 1} axis {a}: sorted list out of order")
            errors.extend(f"cone {l + 1}: {e}" for e in tree.audit())
        return errors
