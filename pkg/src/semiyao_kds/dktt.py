"""Dynamic and kinetic tournament tree.

Keeps the minimum of a changing set of polynomial-valued elements.  Elements
sit at the leaves of a weight-balanced binary tree; every internal node stores
the winner of its two children and a certificate ``value(loser) -
value(winner) > 0`` (ties by element id).  Insertions go to the lighter
child, deletions splice out the parent, and a subtree that gets too lopsided
is rebuilt.
"""
from __future__ import annotations

from typing import Callable, Optional

from .kinetic import KIND_TOURNAMENT, Certificate, EventQueue
from .motion import Polynomial, right_sign

ALPHA = 0.7


class _Node:
    __slots__ = ("left", "right", "parent", "size", "win", "lose", "cert")

    def __init__(self, win=None):
        self.left = self.right = self.parent = None
        self.size = 1
        self.win = win
        self.lose = None
        self.cert = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class Dktt:
    """Tournament over integer element ids with polynomial values.

    ``on_winner_change(old, new)`` fires whenever the root winner changes.
    Certificates carry the key ``(2, tag, owner, a, b)``.
    """

    def __init__(self, queue: EventQueue, tag: int = 0, owner: int = 0,
                 on_winner_change: Optional[Callable] = None):
        self.queue = queue
        self.tag = tag
        self.owner = owner
        self.on_winner_change = on_winner_change
        self.root: Optional[_Node] = None
        self.val: dict = {}
        self.leaf: dict = {}

    # ------------------------------------------------------------------ basics

    def __len__(self) -> int:
        return len(self.val)

    def __contains__(self, eid) -> bool:
        return eid in self.val

    def winner(self):
        return self.root.win if self.root is not None else None

    def height(self) -> int:
        def h(node):
            return 0 if node is None or node.is_leaf else 1 + max(h(node.left), h(node.right))
        return h(self.root)

    def beats(self, a: int, b: int) -> bool:
        """True iff element a is smaller than b just after t_now (ties by id)."""
        s = right_sign(self.val[b] - self.val[a], self.queue.t_now)
        if s:
            return s > 0
        return a < b

    # ------------------------------------------------------------------ certificates

    def _play(self, node: _Node) -> bool:
        """Recompute the match at ``node``; True if its outcome changed."""
        a, b = node.left.win, node.right.win
        self.queue.charge(1)
        win, lose = (a, b) if self.beats(a, b) else (b, a)
        if node.cert is not None and node.cert.alive and (win, lose) == (node.win, node.lose):
            return False
        node.win, node.lose = win, lose
        if node.cert is not None:
            self.queue.deschedule(node.cert)
        poly = self.val[lose] - self.val[win]
        key = (KIND_TOURNAMENT, self.tag, self.owner, min(win, lose), max(win, lose))
        node.cert = Certificate(key, poly, self._fire, payload=node)
        self.queue.schedule(node.cert)
        return True

    def _fire(self, cert: Certificate):
        before = self.winner()
        node = cert.payload
        node.cert = None
        self._repair(node)
        self._notify(before)
        return int(self.winner() != before)

    def _repair(self, node: Optional[_Node]) -> None:
        """Replay matches from ``node`` upward until an outcome stays put."""
        while node is not None and self._play(node):
            node = node.parent

    # ------------------------------------------------------------------ building

    def _build(self, eids: list, parent) -> _Node:
        if len(eids) == 1:
            node = self.leaf[eids[0]]
            node.parent = parent
            node.size = 1
            node.left = node.right = None
            return node
        mid = len(eids) // 2
        node = _Node()
        node.parent = parent
        node.left = self._build(eids[:mid], node)
        node.right = self._build(eids[mid:], node)
        node.size = len(eids)
        self._play(node)
        return node

    def build(self, elements) -> None:
        """Replace the contents with ``elements``, an iterable of (id, poly)."""
        self.clear()
        items = sorted(elements, key=lambda e: e[0])
        for eid, poly in items:
            if eid in self.val:
                raise ValueError(f"duplicate element {eid}")
            self.val[eid] = poly
            self.leaf[eid] = _Node(eid)
        if items:
            self.root = self._build([e for e, _ in items], None)

    def clear(self) -> None:
        self._drop_certs(self.root)
        self.root = None
        self.val.clear()
        self.leaf.clear()

    def _drop_certs(self, node) -> None:
        stack = [node] if node is not None else []
        while stack:
            v = stack.pop()
            if v.cert is not None:
                self.queue.deschedule(v.cert)
                v.cert = None
            if not v.is_leaf:
                stack.append(v.left)
                stack.append(v.right)

    def _leaves(self, node) -> list:
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            if v.is_leaf:
                out.append(v.win)
            else:
                stack.append(v.right)
                stack.append(v.left)
        return out

    def _rebalance(self, node: Optional[_Node]) -> None:
        """Rebuild the highest lopsided subtree on the path from ``node`` up."""
        worst = None
        while node is not None:
            if not node.is_leaf and max(node.left.size, node.right.size) > ALPHA * node.size:
                worst = node
            node = node.parent
        if worst is None:
            return
        parent = worst.parent
        eids = self._leaves(worst)
        self._drop_certs(worst)
        new = self._build(eids, parent)
        self.queue.charge(len(eids))
        if parent is None:
            self.root = new
        elif parent.left is worst:
            parent.left = new
        else:
            parent.right = new

    # ------------------------------------------------------------------ updates

    def insert(self, eid: int, poly: Polynomial) -> None:
        if eid in self.val:
            raise ValueError(f"element {eid} already present")
        self.val[eid] = poly
        leaf = self.leaf[eid] = _Node(eid)
        if self.root is None:
            self.root = leaf
            if self.on_winner_change is not None:
                self.on_winner_change(None, eid)
            return
        before = self.root.win
        node = self.root
        while not node.is_leaf:
            node.size += 1
            node = node.left if node.left.size <= node.right.size else node.right
            self.queue.charge(1)
        parent = node.parent
        join = _Node()
        join.parent = parent
        join.left, join.right = node, leaf
        node.parent = leaf.parent = join
        join.size = 2
        if parent is None:
            self.root = join
        elif parent.left is node:
            parent.left = join
        else:
            parent.right = join
        self._repair(join)
        self._notify(before)
        self._rebalance(join)

    def delete(self, eid: int) -> None:
        if eid not in self.val:
            raise KeyError(f"element {eid} not present")
        leaf = self.leaf.pop(eid)
        before = self.winner()
        parent = leaf.parent
        if parent is None:
            self.root = None
            del self.val[eid]
            if self.on_winner_change is not None:
                self.on_winner_change(before, None)
            return
        sib = parent.left if parent.right is leaf else parent.right
        grand = parent.parent
        if parent.cert is not None:
            self.queue.deschedule(parent.cert)
        sib.parent = grand
        if grand is None:
            self.root = sib
        elif grand.left is parent:
            grand.left = sib
        else:
            grand.right = sib
        del self.val[eid]
        node = grand
        while node is not None:
            node.size -= 1
            node = node.parent
        self._repair(grand)
        self._notify(before)
        self._rebalance(grand)

    def _notify(self, before) -> None:
        after = self.winner()
        if after != before and self.on_winner_change is not None:
            self.on_winner_change(before, after)

    # ------------------------------------------------------------------ audit

    def audit(self) -> list:
        errors = []
        if self.root is None:
            return [] if not self.val else ["elements without a tree"]
        if sorted(self._leaves(self.root)) != sorted(self.val):
            errors.append("leaf set differs from element set")
        best = None
        for e in sorted(self.val):
            if best is None or self.beats(e, best):
                best = e
        if self.root.win != best:
            errors.append(f"winner {self.root.win} but argmin {best}")
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v.is_leaf:
                continue
            if v.size != v.left.size + v.right.size:
                errors.append("size field wrong")
            if v.left.parent is not v or v.right.parent is not v:
                errors.append("parent pointer wrong")
            if v.cert is None or not v.cert.alive:
                errors.append("internal node without live certificate")
            if {v.win, v.lose} != {v.left.win, v.right.win}:
                errors.append("stale match")
            stack.extend((v.left, v.right))
        return errors
