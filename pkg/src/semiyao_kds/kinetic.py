"""Certificates, the global event queue and the event loop.

A certificate asserts that its polynomial is positive just after the current
time (the right-limit convention).  Its failure time is ``t_now`` when that is
already false (a cascade at a shared instant) and otherwise the next odd root.
An identically zero polynomial never fails; its owner orders the pair by id.
"""
from __future__ import annotations

import heapq
import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Callable, Iterable, Optional

from .motion import Instant, Polynomial, as_instant, next_sign_change, right_sign

KIND_U, KIND_X, KIND_TOURNAMENT = 0, 1, 2
KIND_NAMES = {KIND_U: "u-swap", KIND_X: "x-swap", KIND_TOURNAMENT: "tournament"}


class Certificate:
    """A scheduled sign condition.

    ``key`` is the deterministic tie-break key: ``(kind, cone, axis, a, b)`` for
    order certificates and ``(2, module, owner, a, b)`` for tournament nodes.
    ``handler(cert)`` runs on failure and returns the number of edge changes it
    caused (or None).
    """

    __slots__ = ("key", "poly", "handler", "time", "alive", "points", "payload")

    def __init__(self, key: tuple, poly: Polynomial, handler: Callable, points=(), payload=None):
        self.key = key
        self.poly = poly
        self.handler = handler
        self.time: Optional[Instant] = None
        self.alive = False
        self.points = points
        self.payload = payload

    @property
    def kind(self) -> int:
        return self.key[0]

    def __repr__(self):
        return f"Certificate({self.key}, t={self.time})"


def failure_time(poly: Polynomial, t_now: Instant) -> Optional[Instant]:
    if poly.is_zero:
        return None
    if right_sign(poly, t_now) < 0:
        return t_now
    return next_sign_change(poly, t_now)


@dataclass
class EventStats:
    counts: Counter = field(default_factory=Counter)
    cost: int = 0
    max_event_cost: int = 0
    edge_changes: int = 0
    max_point_certs: int = 0

    def as_row(self) -> dict:
        return {
            "u_swaps": self.counts[KIND_U],
            "x_swaps": self.counts[KIND_X],
            "tournament": self.counts[KIND_TOURNAMENT],
            "edge_changes": self.edge_changes,
            "cost_units": self.cost,
            "max_event_cost": self.max_event_cost,
            "max_point_certs": self.max_point_certs,
        }

    @property
    def swaps(self) -> int:
        return self.counts[KIND_U] + self.counts[KIND_X]


class LocalityError(AssertionError):
    pass


class EventQueue:
    """Priority queue of failure times with lazy deletion."""

    def __init__(self, t0=0, locality_limit: Optional[int] = None, log_events: bool = False):
        self.t_now = as_instant(t0)
        self._heap: list = []
        self._seq = itertools.count()
        self.stats = EventStats()
        self.point_certs: dict = defaultdict(int)
        self.locality_limit = locality_limit
        self.log: Optional[list] = [] if log_events else None
        self._event_cost = 0

    # cost accounting: modules charge node visits here
    def charge(self, units: int = 1) -> None:
        self._event_cost += units

    def schedule(self, cert: Certificate) -> Certificate:
        assert not cert.alive, "certificate already scheduled"
        cert.alive = True
        cert.time = failure_time(cert.poly, self.t_now)
        if cert.time is not None:
            heapq.heappush(self._heap, (cert.time, cert.key, next(self._seq), cert))
        if cert.kind != KIND_TOURNAMENT:
            for p in cert.points:
                self.point_certs[p] += 1
                c = self.point_certs[p]
                if c > self.stats.max_point_certs:
                    self.stats.max_point_certs = c
                    if self.locality_limit is not None and c > self.locality_limit:
                        raise LocalityError(f"point {p} holds {c} order certificates")
        return cert

    def deschedule(self, cert: Certificate) -> None:
        if not cert.alive:
            return
        cert.alive = False
        if cert.kind != KIND_TOURNAMENT:
            for p in cert.points:
                self.point_certs[p] -= 1

    def _drop_dead(self) -> None:
        heap = self._heap
        while heap and not heap[0][3].alive:
            heapq.heappop(heap)

    def peek_time(self) -> Optional[Instant]:
        self._drop_dead()
        return self._heap[0][0] if self._heap else None

    def __len__(self) -> int:
        return sum(1 for e in self._heap if e[3].alive)

    def advance_to_next_event(self):
        """Pop the earliest live certificate and run its handler."""
        self._drop_dead()
        if not self._heap:
            return None
        t, _, _, cert = heapq.heappop(self._heap)
        assert not t < self.t_now, "event queue went back in time"
        self.t_now = t
        self.deschedule(cert)
        self._event_cost = 0
        changes = cert.handler(cert) or 0
        st = self.stats
        st.counts[cert.kind] += 1
        st.edge_changes += changes
        st.cost += self._event_cost
        st.max_event_cost = max(st.max_event_cost, self._event_cost)
        if self.log is not None:
            self.log.append((t, KIND_NAMES[cert.kind], cert.key, changes))
        return t, cert

    def run_until(self, horizon, checkpoints: Iterable = (), on_checkpoint: Optional[Callable] = None,
                  on_event: Optional[Callable] = None) -> EventStats:
        """Process events with time <= horizon.

        A checkpoint at time c fires after every event at times <= c, so the
        callback sees the right-limit state at c.  ``on_event(t, cert)`` runs
        after each handler.
        """
        horizon = as_instant(horizon)
        pending = [as_instant(c) for c in checkpoints]
        assert all(not b < a for a, b in zip(pending, pending[1:])), "checkpoints must be sorted"
        idx = 0
        while True:
            nxt = self.peek_time()
            if nxt is None or horizon < nxt:
                break
            while idx < len(pending) and pending[idx] < nxt:
                self._fire(pending[idx], on_checkpoint)
                idx += 1
            t, cert = self.advance_to_next_event()
            if on_event is not None:
                on_event(t, cert)
        while idx < len(pending) and not horizon < pending[idx]:
            self._fire(pending[idx], on_checkpoint)
            idx += 1
        if self.t_now < horizon:
            self.t_now = horizon
        return self.stats

    def _fire(self, t: Instant, cb) -> None:
        if self.t_now < t:
            self.t_now = t
        if cb is not None:
            cb(t)


# ---------------------------------------------------------------------------
# kinetic sorted lists


def taylor_key(poly: Polynomial, t) -> tuple:
    """Coefficients of poly(t + h) in h; lexicographic order is the right-limit order."""
    out = []
    q = poly
    fact = 1
    for k in range(len(poly.coeffs) or 1):
        if k:
            fact *= k
        out.append(q(t) / fact if k else q(t))
        q = q.derivative()
    return tuple(out)


def right_limit_less(pa: Polynomial, ta: int, pb: Polynomial, tb: int, t) -> bool:
    """True iff (pa, ta) precedes (pb, tb) just after time t."""
    s = right_sign(pb - pa, as_instant(t))
    if s:
        return s > 0
    return ta < tb


def sort_right_limit(ids, polys: dict, tie_sign: int, t) -> list:
    """Ids sorted by the right-limit value of ``polys[id]`` at t, ties by signed id."""
    t = as_instant(t)
    if t.is_exact:
        v = t.lo
        width = max((len(polys[i].coeffs) for i in ids), default=1)

        def key(i):
            k = taylor_key(polys[i], v)
            return k + (0,) * (width - len(k)) + (tie_sign * i,)
        return sorted(ids, key=key)

    def cmp(a, b):
        if a == b:
            return 0
        return -1 if right_limit_less(polys[a], tie_sign * a, polys[b], tie_sign * b, t) else 1
    return sorted(ids, key=cmp_to_key(cmp))


class KineticSortedList:
    """Ids kept sorted by a polynomial coordinate, one certificate per adjacent pair.

    ``on_swap(i, a, b)`` is called after ``a`` and ``b`` (formerly at positions
    i, i+1) exchange places, and returns the number of edge changes it caused.
    """

    def __init__(self, order: list, polys: dict, tie_sign: int, kind: int, cone: int, axis: int,
                 queue: EventQueue, on_swap: Optional[Callable] = None):
        self.order = list(order)
        self.pos = {p: i for i, p in enumerate(self.order)}
        self.polys = polys
        self.tie_sign = tie_sign
        self.kind, self.cone, self.axis = kind, cone, axis
        self.queue = queue
        self.on_swap = on_swap
        self.certs: list = [None] * max(len(self.order) - 1, 0)
        for i in range(len(self.certs)):
            self._make(i)

    def _make(self, i: int) -> None:
        a, b = self.order[i], self.order[i + 1]
        poly = self.polys[b] - self.polys[a]
        if poly.is_zero:
            assert self.tie_sign * a < self.tie_sign * b, "identical coordinates out of id order"
        key = (self.kind, self.cone, self.axis, min(a, b), max(a, b))
        cert = Certificate(key, poly, self._fire, points=(a, b), payload=i)
        self.certs[i] = cert
        self.queue.schedule(cert)

    def _fire(self, cert: Certificate):
        i = cert.payload
        return self.swap(i)

    def swap(self, i: int):
        a, b = self.order[i], self.order[i + 1]
        self.order[i], self.order[i + 1] = b, a
        self.pos[a], self.pos[b] = i + 1, i
        slots = [j for j in (i - 1, i, i + 1) if 0 <= j < len(self.certs)]
        for j in slots:
            self.queue.deschedule(self.certs[j])
        for j in slots:
            self._make(j)
        self.queue.charge(3)
        if self.on_swap is not None:
            return self.on_swap(i, a, b)
        return 0

    def detach(self) -> None:
        for c in self.certs:
            self.queue.deschedule(c)
