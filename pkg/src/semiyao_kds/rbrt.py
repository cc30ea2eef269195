"""Rank-based range tree for one cone.

Every level is an implicit perfect binary tree over ``N`` rank slots (heap
indices: root 1, leaf for rank r is ``N + r``).  The skeleton never changes;
only the rank arrays do.  A last-level node is a *chain* ``(a_0, .., a_{d-1})``
of one node per level, packed into the integer ``((a_0 * M) + a_1) * M + ..``
with ``M = 2N``.  Its point set R(chain) is the box of points whose rank on
axis i falls under ``a_i``.

q lies in the cone of p iff q follows p in every axis order.  The canonical
chains of p take, on every level, the right siblings of the left children on
p's leaf path, so every canonical component is a right child.  Hence

* ``rmin`` is kept for chains whose first d-1 components are right children,
  with the whole last-level path stored so a node is repaired from its two
  children;
* the B-set of a right-child chain v is R of its sibling chain (every
  component minus one), so ``bmax`` is kept the same way for left-child
  prefixes.
"""
from __future__ import annotations

import itertools
from typing import Callable, Optional

import numpy as np

NONE = -1


def _pow2_at_least(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


class ConeTree:
    """RBRT for one cone over point indices ``0..n-1``.

    ``ranks[i]`` and ``orders[i]`` (i < d) are the u-axis rank maps and sorted
    orders, ``ranks[d]`` / ``orders[d]`` the same for the cone axis.  They are
    shared with the kinetic sorted lists and already updated when a swap
    handler runs.

    ``track`` enables the kinetic state: the L(B'(v)) lists and Link sets.
    ``track_b`` additionally keeps b(v) and a change log for the RNN graph.
    """

    def __init__(self, ranks: list, orders: list, track: bool = True, track_b: bool = False,
                 charge: Optional[Callable] = None):
        self.d = len(ranks) - 1
        self.ranks = ranks
        self.orders = orders
        self.n = n = len(orders[0])
        self.N = N = _pow2_at_least(n)
        self.LOG = N.bit_length() - 1
        self.M = M = 2 * N
        self.ONES = sum(M ** k for k in range(self.d))
        self.track = track
        self.track_b = track_b
        self.charge = charge or (lambda units=1: None)
        # rank range under each heap node
        self.lo = [0] * (2 * N)
        self.hi = [0] * (2 * N)
        for a in range(1, 2 * N):
            h = self.LOG - (a.bit_length() - 1)
            self.lo[a] = (a << h) - N
            self.hi[a] = self.lo[a] + (1 << h) - 1
        self._anc = [[(N + r) >> k for k in range(self.LOG + 1)] for r in range(N)]
        self._right = [[a for a in anc if a & 1 and a != 1] for anc in self._anc]
        self._left = [[a for a in anc if not a & 1] for anc in self._anc]
        self._sib = [[a + 1 for a in anc if not a & 1] for anc in self._anc]
        self.target: list = [NONE] * n
        self.rmin: dict = {}
        self.bmax: dict = {}
        self.lists: dict = {}      # code -> {target: set(w)}
        self.link: list = [()] * n
        self.touched: dict = {}    # code -> (old b, old r), all-right chains only
        if n:
            self._build()

    # ------------------------------------------------------------------ codes

    def encode(self, chain) -> int:
        c = 0
        for a in chain:
            c = c * self.M + a
        return c

    def decode(self, code: int) -> tuple:
        out = []
        for _ in range(self.d):
            code, a = divmod(code, self.M)
            out.append(a)
        return tuple(reversed(out))

    def box(self, chain) -> list:
        """R(chain): points whose rank on each level lies under that level's node."""
        rk = self.ranks
        return [p for p in range(self.n)
                if all(self.lo[a] <= rk[i][p] <= self.hi[a] for i, a in enumerate(chain))]

    def canonical_chains(self, p: int) -> list:
        """Codes of the canonical chains of p (empty R included)."""
        levels = [self._sib[self.ranks[i][p]] for i in range(self.d)]
        return [self.encode(ch) for ch in itertools.product(*levels)]

    def canonical_cone_nodes(self, p: int) -> list:
        """Canonical chains of p with nonempty R, as node tuples."""
        return [self.decode(c) for c in self.canonical_chains(p) if self._rmin_of(c) != NONE]

    def _rmin_of(self, code: int) -> int:
        if self.rmin is not None and code in self.rmin:
            return self.rmin[code]
        return NONE

    # ------------------------------------------------------------------ build

    def _level_arrays(self):
        ranks = np.array([[self.ranks[i][p] for p in range(self.n)] for i in range(self.d)], dtype=np.int64)
        shifts = np.arange(self.LOG + 1, dtype=np.int64)
        return (self.N + ranks)[:, :, None] >> shifts   # (d, n, L)

    def _chains(self, anc, masks):
        """Broadcast per-level node arrays (n, L) into chain codes (n, L^d)."""
        n, L = anc.shape[1], anc.shape[2]
        code = anc[0]
        mask = masks[0]
        for i in range(1, self.d):
            shape = (n,) + (1,) * i + (L,)
            code = code[..., None] * self.M + anc[i].reshape(shape)
            mask = mask[..., None] & masks[i].reshape(shape)
        return code.reshape(n, -1), mask.reshape(n, -1)

    def _aggregate(self, anc, xr, sign: int, parity: int, full_last: bool):
        d = self.d
        masks = []
        for i in range(d):
            a = anc[i]
            if i == d - 1 and full_last:
                masks.append(a >= 2)
            elif parity:
                masks.append((a & 1).astype(bool) & (a != 1))
            else:
                masks.append(~(a & 1).astype(bool))
        code, mask = self._chains(anc, masks)
        pid = np.broadcast_to(np.arange(self.n)[:, None], code.shape)
        code, pid = code[mask], pid[mask]
        key = sign * xr[pid]
        o = np.lexsort((key, code))
        code, pid = code[o], pid[o]
        first = np.ones(len(code), dtype=bool)
        first[1:] = code[1:] != code[:-1]
        return code[first], pid[first]

    def _build(self) -> None:
        anc = self._level_arrays()
        xr = np.array([self.ranks[self.d][p] for p in range(self.n)], dtype=np.int64)
        full = self.track
        rcodes, rvals = self._aggregate(anc, xr, 1, 1, full)
        # targets: min x-rank over canonical chains
        sib_masks = [~(anc[i] & 1).astype(bool) for i in range(self.d)]
        scode, smask = self._chains(anc + 1, sib_masks)
        idx = np.searchsorted(rcodes, scode)
        idx = np.minimum(idx, max(len(rcodes) - 1, 0))
        found = smask & (len(rcodes) > 0)
        if len(rcodes):
            found &= rcodes[idx] == scode
            cand = rvals[idx]
        else:
            cand = np.zeros_like(scode)
        key = np.where(found, xr[cand], np.iinfo(np.int64).max)
        best = key.argmin(axis=1)
        rows = np.arange(self.n)
        tgt = np.where(found[rows, best], cand[rows, best], NONE)
        self.target = tgt.tolist()
        self.charge(int(smask.sum()) + len(rcodes))
        self.rmin = dict(zip(rcodes.tolist(), rvals.tolist()))
        if not self.track:
            return
        if self.track_b:
            bcodes, bvals = self._aggregate(anc, xr, -1, 0, True)
            self.bmax = dict(zip(bcodes.tolist(), bvals.tolist()))
        for w in range(self.n):
            self._attach(w)

    # ------------------------------------------------------------------ lists

    def _attach(self, w: int) -> None:
        codes = self.canonical_chains(w)
        self.link[w] = codes
        t = self.target[w]
        lists = self.lists
        for c in codes:
            bucket = lists.get(c)
            if bucket is None:
                bucket = lists[c] = {}
            s = bucket.get(t)
            if s is None:
                s = bucket[t] = set()
            s.add(w)
        self.charge(len(codes))

    def _detach(self, w: int) -> None:
        t = self.target[w]
        lists = self.lists
        for c in self.link[w]:
            bucket = lists[c]
            s = bucket[t]
            s.discard(w)
            if not s:
                del bucket[t]
                if not bucket:
                    del lists[c]
        self.charge(len(self.link[w]))
        self.link[w] = ()

    def pairs_with_target(self, code: int, p: int) -> list:
        """Sources w listed at chain ``code`` whose target is p, in id order."""
        bucket = self.lists.get(code)
        if not bucket:
            return []
        return sorted(bucket.get(p, ()))

    def retarget(self, w: int, new: int) -> None:
        old = self.target[w]
        if old == new:
            return
        lists = self.lists
        for c in self.link[w]:
            bucket = lists[c]
            s = bucket[old]
            s.discard(w)
            if not s:
                del bucket[old]
            s = bucket.get(new)
            if s is None:
                s = bucket[new] = set()
            s.add(w)
        self.charge(len(self.link[w]))
        self.target[w] = new

    # ------------------------------------------------------------------ queries

    def query_target(self, p: int) -> int:
        """Minimum cone-axis point in the cone of p, from the aggregates."""
        xr = self.ranks[self.d]
        best, best_key = NONE, None
        rmin = self.rmin
        codes = self.link[p] if self.track and self.link[p] else self.canonical_chains(p)
        for c in codes:
            r = rmin.get(c)
            if r is not None and (best_key is None or xr[r] < best_key):
                best, best_key = r, xr[r]
        self.charge(len(codes))
        return best

    def rnn_pairs(self) -> dict:
        """(b(v), r(v)) for every canonical-capable chain v with both sides nonempty."""
        out = {}
        for code, r in self.rmin.items():
            if self._all_parity(code, 1):
                b = self.bmax.get(code - self.ONES)
                if b is not None:
                    out[code] = (b, r)
        return out

    def _all_parity(self, code: int, parity: int) -> bool:
        for _ in range(self.d):
            code, a = divmod(code, self.M)
            if parity:
                if not a & 1 or a == 1:
                    return False
            elif a & 1:
                return False
        return True

    # ------------------------------------------------------------------ updates

    def _in_box(self, p: int, prefix) -> bool:
        rk = self.ranks
        for i, a in enumerate(prefix):
            if not self.lo[a] <= rk[i][p] <= self.hi[a]:
                return False
        return True

    def _note(self, code: int) -> None:
        """Record the pre-event (b, r) of an all-right chain the first time it changes."""
        if code not in self.touched:
            self.touched[code] = (self.bmax.get(code - self.ONES, NONE), self.rmin.get(code, NONE))

    def _fix_path(self, data: dict, sign: int, parity: int, prefix: tuple, slot: int) -> None:
        """Recompute the last-level path above ``slot`` under ``prefix``."""
        M, N = self.M, self.N
        base = self.encode(prefix) * M if prefix else 0
        xr = self.ranks[self.d]
        last = self.d - 1
        occupant = self.orders[last][slot]
        node = N + slot
        val = occupant if self._in_box(occupant, prefix) else NONE
        pfx_match = self._prefix_parity(prefix, parity)
        while node >= 2:
            if node != N + slot:
                a = data.get(base + 2 * node, NONE)
                b = data.get(base + 2 * node + 1, NONE)
                if a == NONE:
                    val = b
                elif b == NONE or sign * xr[a] < sign * xr[b]:
                    val = a
                else:
                    val = b
            code = base + node
            old = data.get(code, NONE)
            if old != val:
                if self.track_b and pfx_match and (node & 1) == parity:
                    self._note(code + (self.ONES if parity == 0 else 0))
                if val == NONE:
                    del data[code]
                else:
                    data[code] = val
            node >>= 1
            self.charge(1)

    def _prefix_parity(self, prefix, parity) -> bool:
        for a in prefix:
            if parity and (not a & 1 or a == 1):
                return False
            if not parity and a & 1:
                return False
        return True

    def _pnodes(self, slot: int, parity: int) -> list:
        return self._right[slot] if parity else self._left[slot]

    def _u_swap_aggregate(self, data, sign, parity, level, p, q) -> None:
        """Repair one aggregate after p (now rank r+1) and q (now rank r) swap on ``level``."""
        d = self.d
        rk = self.ranks
        r = rk[level][q]
        if level == d - 1:
            prefixes = set()
            for w in (p, q):
                prefixes.update(itertools.product(*[self._pnodes(rk[i][w], parity) for i in range(d - 1)]))
            for pre in sorted(prefixes):
                self._fix_path(data, sign, parity, pre, r)
                self._fix_path(data, sign, parity, pre, r + 1)
            return
        # level-`level` nodes separating slots r and r+1 (below their common ancestor)
        sep = set()
        for s in (r, r + 1):
            other = r + 1 if s == r else r
            common = set(self._anc[other])
            sep.update(a for a in self._pnodes(s, parity) if a not in common)
        per_level = []
        for i in range(d - 1):
            if i == level:
                per_level.append(sorted(sep))
            else:
                per_level.append(sorted(set(self._pnodes(rk[i][p], parity)) | set(self._pnodes(rk[i][q], parity))))
        for pre in itertools.product(*per_level):
            for w in (p, q):
                self._fix_path(data, sign, parity, pre, rk[d - 1][w])

    def u_swap(self, level: int, p: int, q: int) -> list:
        """p and q exchanged adjacent ranks on ``level`` (p now after q).

        Returns ``[(w, old_target, new_target)]`` for target changes.
        """
        if p == q:
            raise ValueError("swap needs two distinct points")
        if abs(self.ranks[level][p] - self.ranks[level][q]) != 1:
            raise ValueError("only adjacent ranks can swap")
        for w in (p, q):
            self._detach(w)
        self._u_swap_aggregate(self.rmin, 1, 1, level, p, q)
        if self.track_b:
            self._u_swap_aggregate(self.bmax, -1, 0, level, p, q)
        changes = []
        for w in (p, q):
            old = self.target[w]
            new = self.query_target(w)
            self.target[w] = new
            self._attach(w)
            if new != old:
                changes.append((w, old, new))
        return changes

    def _common_pnodes(self, level, p, q, parity):
        rk = self.ranks
        a = set(self._pnodes(rk[level][p], parity))
        return sorted(a.intersection(self._pnodes(rk[level][q], parity)))

    def _x_swap_aggregate(self, data, parity, old, new, p, q) -> None:
        """Chains containing both p and q whose value is ``old`` now hold ``new``."""
        d = self.d
        rk = self.ranks
        per_level = [self._common_pnodes(i, p, q, parity) for i in range(d - 1)]
        last = sorted(set(self._anc[rk[d - 1][p]]).intersection(self._anc[rk[d - 1][q]]) - {1})
        M = self.M
        for pre in itertools.product(*per_level):
            base = self.encode(pre) * M if pre else 0
            for node in last:
                code = base + node
                self.charge(1)
                if data.get(code) == old:
                    if self.track_b and (node & 1) == parity and self._prefix_parity(pre, parity):
                        self._note(code + (self.ONES if parity == 0 else 0))
                    data[code] = new

    def x_swap(self, p: int, q: int) -> list:
        """p and q exchanged adjacent cone-axis ranks; q now precedes p."""
        if self.ranks[self.d][q] + 1 != self.ranks[self.d][p]:
            raise ValueError("x-swap needs q directly before p")
        self._x_swap_aggregate(self.rmin, 1, p, q, p, q)
        if self.track_b:
            self._x_swap_aggregate(self.bmax, 0, q, p, p, q)
        # sources whose target was p and whose cone contains q
        rk = self.ranks
        changes = []
        levels = [self._right[rk[i][q]] for i in range(self.d)]
        for chain in itertools.product(*levels):
            code = self.encode(chain)
            self.charge(1)
            if self.rmin.get(code) != q:
                continue
            for w in self.pairs_with_target(code, p):
                if not all(rk[i][w] < rk[i][q] for i in range(self.d)):
                    raise AssertionError(f"x-swap witness {w} does not see {q}")
                self.retarget(w, q)
                changes.append((w, p, q))
        return changes

    # ------------------------------------------------------------------ audit

    def brute_aggregates(self, parity: int, sign: int) -> dict:
        """From-scratch aggregate over the stored chain family (slow, for audits)."""
        xr = self.ranks[self.d]
        out = {}
        d = self.d
        for p in range(self.n):
            levels = [self._pnodes(self.ranks[i][p], parity) for i in range(d - 1)]
            levels.append([a for a in self._anc[self.ranks[d - 1][p]] if a >= 2])
            for chain in itertools.product(*levels):
                c = self.encode(chain)
                cur = out.get(c)
                if cur is None or sign * xr[p] < sign * xr[cur]:
                    out[c] = p
        return out

    def audit(self) -> list:
        """Compare incremental state with a from-scratch computation."""
        errors = []
        if self.rmin != self.brute_aggregates(1, 1):
            errors.append("rmin aggregates diverge")
        if self.track_b and self.bmax != self.brute_aggregates(0, -1):
            errors.append("bmax aggregates diverge")
        for w in range(self.n):
            want = self.query_target(w)
            if self.target[w] != want:
                errors.append(f"target of {w}: stored {self.target[w]} recomputed {want}")
            if self.track and sorted(self.link[w]) != sorted(self.canonical_chains(w)):
                errors.append(f"link set of {w} stale")
        if self.track:
            seen = {}
            for code, bucket in self.lists.items():
                for t, ws in bucket.items():
                    for w in ws:
                        if self.target[w] != t:
                            errors.append(f"list entry ({w}, {t}) at {code} stale")
                        seen[w] = seen.get(w, 0) + 1
            for w in range(self.n):
                if seen.get(w, 0) != len(self.link[w]):
                    errors.append(f"link count of {w} wrong")
        return errors

    def dump(self) -> str:
        lines = [f"rbrt d={self.d} n={self.n} slots={self.N}"]
        for code in sorted(self.rmin):
            chain = self.decode(code)
            lines.append("  " * 1 + f"{chain} r={self.rmin[code]}"
                         + (f" b={self.bmax.get(code - self.ONES, NONE)}" if self.track_b else ""))
        return "\n".join(lines)
