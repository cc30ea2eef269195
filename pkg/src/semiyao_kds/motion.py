"""Polynomial trajectories and exact sign-change computation.

Coefficients are exact rationals.  Times are :class:`Instant` values: either an
exact rational or a real algebraic number held as (square-free polynomial,
isolating interval).  Every sign decision made against an ``Instant`` is exact;
intervals are refined on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from gmpy2 import mpq

Number = Union[int, Fraction]
# exact rationals are held as GMP rationals; Fraction inputs convert losslessly
Q = mpq
_RATIONAL = (int, Fraction, type(mpq()))

# initial relative width of isolating intervals built from float estimates
ROOT_TOL = 1e-12
_MAX_BISECT = 4000


class DegenerateRootError(ArithmeticError):
    """Root isolation did not converge; carries the last isolating interval."""

    def __init__(self, poly, interval):
        super().__init__(f"cannot isolate root of {poly} in {interval}")
        self.poly = poly
        self.interval = interval


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def _trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _horner(c: Sequence, x):
    acc = 0
    for a in reversed(c):
        acc = acc * x + a
    return acc


class Polynomial:
    """Dense univariate polynomial, constant term first, canonical (trimmed)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _trim([Q(a) for a in coeffs])

    @classmethod
    def _raw(cls, coeffs: tuple) -> "Polynomial":
        p = object.__new__(cls)
        p.coeffs = coeffs
        return p

    @classmethod
    def constant(cls, a) -> "Polynomial":
        return cls((a,))

    @property
    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, t):
        return _horner(self.coeffs, t)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, x in enumerate(b):
            c[i] += x
        return Polynomial._raw(_trim(c))

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(tuple(-x for x in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        c = [0] * n
        for i, x in enumerate(a):
            c[i] = x
        for i, x in enumerate(b):
            c[i] -= x
        return Polynomial._raw(_trim(c))

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            k = Q(other)
            return Polynomial._raw(_trim([x * k for x in self.coeffs]))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial._raw(())
        c = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    c[i + j] += x * y
        return Polynomial._raw(_trim(c))

    __rmul__ = __mul__

    def derivative(self) -> "Polynomial":
        return Polynomial._raw(tuple(i * a for i, a in enumerate(self.coeffs) if i))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({[str(a) for a in self.coeffs]})"

    def as_float(self) -> np.ndarray:
        return np.array([float(a) for a in self.coeffs], dtype=float)


ZERO = Polynomial._raw(())


def evaluate(p: Polynomial, t) -> Fraction:
    """Value of ``p`` at a rational time (or at the value of an exact Instant)."""
    if isinstance(t, Instant):
        if not t.is_exact:
            raise ValueError("evaluate() needs an exact time; use sign_at for algebraic times")
        t = t.lo
    return Q(p(t))


# ---------------------------------------------------------------------------
# polynomial algebra over Q


def poly_divmod(a: Polynomial, b: Polynomial):
    if b.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a.coeffs)
    bc = b.coeffs
    db = len(bc) - 1
    lead = bc[-1]
    if len(r) - 1 < db:
        return ZERO, a
    q = [Q(0)] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        coef = r[k] / lead
        q[k - db] = coef
        if coef:
            for j in range(db + 1):
                r[k - db + j] -= coef * bc[j]
    return Polynomial._raw(_trim(q)), Polynomial._raw(_trim(r[:db]))


def _monic(p: Polynomial) -> Polynomial:
    lead = p.coeffs[-1]
    if lead == 1:
        return p
    return Polynomial._raw(tuple(Q(x) / lead for x in p.coeffs))


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd (zero only if both are zero)."""
    while not b.is_zero:
        a, b = b, poly_divmod(a, b)[1]
    return _monic(a) if not a.is_zero else a


def odd_multiplicity_part(p: Polynomial) -> Polynomial:
    """Square-free product of the factors of ``p`` with odd multiplicity.

    Its real roots are exactly the points where ``p`` changes sign.
    """
    if p.degree <= 1:
        return p
    dp = p.derivative()
    a0 = poly_gcd(p, dp)
    if a0.degree == 0:
        return p
    # Yun's square-free factorisation
    b = poly_divmod(p, a0)[0]
    c = poly_divmod(dp, a0)[0]
    d = c - b.derivative()
    out = Polynomial((1,))
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if i % 2 == 1:
            out = out * a
        b = poly_divmod(b, a)[0]
        c = poly_divmod(d, a)[0]
        d = c - b.derivative()
        i += 1
    return out


def sturm_sequence(p: Polynomial) -> list:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero and seq[-1].degree > 0:
        r = poly_divmod(seq[-2], seq[-1])[1]
        if r.is_zero:
            break
        seq.append(-r)
    return seq


def _variations(seq, x) -> int:
    v = 0
    last = 0
    for s in seq:
        y = _sgn(s(x))
        if y:
            if last and y != last:
                v += 1
            last = y
    return v


def _cauchy_bound(p: Polynomial) -> Fraction:
    c = p.coeffs
    lead = abs(c[-1])
    return 1 + max(abs(a) for a in c[:-1]) / lead if len(c) > 1 else Q(1)


# ---------------------------------------------------------------------------
# time instants


@total_ordering
class Instant:
    """A real time value: exact rational, or an isolated root of a polynomial.

    For an algebraic instant ``poly`` is square-free, ``poly(lo)`` and
    ``poly(hi)`` are nonzero with opposite signs, and the value is the unique
    root of ``poly`` in the open interval ``(lo, hi)``.
    """

    __slots__ = ("poly", "lo", "hi", "_slo")

    def __init__(self, value: Number):
        v = Q(value)
        self.poly = None
        self.lo = self.hi = v
        self._slo = 0

    @classmethod
    def root(cls, poly: Polynomial, lo: Fraction, hi: Fraction) -> "Instant":
        t = object.__new__(cls)
        t.poly = poly
        t.lo = lo
        t.hi = hi
        t._slo = _sgn(poly(lo))
        return t

    @property
    def is_exact(self) -> bool:
        return self.poly is None

    @property
    def tolerance(self) -> Fraction:
        return self.hi - self.lo

    def refine(self) -> None:
        if self.poly is None:
            return
        mid = (self.lo + self.hi) / 2
        s = _sgn(self.poly(mid))
        if s == 0:
            self.poly = None
            self.lo = self.hi = mid
            self._slo = 0
        elif s == self._slo:
            self.lo = mid
        else:
            self.hi = mid

    def refine_to(self, width) -> "Instant":
        width = Q(width)
        n = 0
        while self.poly is not None and self.hi - self.lo > width:
            self.refine()
            n += 1
            if n > _MAX_BISECT:
                raise DegenerateRootError(self.poly, (self.lo, self.hi))
        return self

    def __float__(self) -> float:
        return float((self.lo + self.hi) / 2)

    def approx(self) -> float:
        """Float value after refining below double precision."""
        if self.poly is not None:
            mag = max(abs(self.lo), abs(self.hi), Q(1))
            self.refine_to(mag * Q(1, 2**60))
        return float(self)

    def _cmp(self, other: "Instant") -> int:
        if self is other:
            return 0
        a, b = self, other
        gcd_checked = False
        for _ in range(_MAX_BISECT):
            if a.poly is None and b.poly is None:
                return _sgn(a.lo - b.lo)
            if a.hi < b.lo or (a.hi == b.lo and (a.poly is not None or b.poly is not None)):
                return -1
            if b.hi < a.lo or (b.hi == a.lo and (a.poly is not None or b.poly is not None)):
                return 1
            if a.poly is None:
                # rational strictly inside b's interval: side decided by b's sign there
                s = _sgn(b.poly(a.lo))
                if s == 0:
                    return 0
                return -1 if s == b._slo else 1
            if b.poly is None:
                s = _sgn(a.poly(b.lo))
                if s == 0:
                    return 0
                return 1 if s == a._slo else -1
            if not gcd_checked:
                gcd_checked = True
                g = poly_gcd(a.poly, b.poly)
                if g.degree > 0:
                    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
                    if _sgn(g(lo)) * _sgn(g(hi)) < 0:
                        return 0
            if a.hi - a.lo >= b.hi - b.lo:
                a.refine()
            else:
                b.refine()
        raise DegenerateRootError(a.poly, (a.lo, a.hi))

    def __eq__(self, other):
        if not isinstance(other, Instant):
            if isinstance(other, _RATIONAL):
                other = Instant(other)
            else:
                return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        if not isinstance(other, Instant):
            if isinstance(other, _RATIONAL):
                other = Instant(other)
            else:
                return NotImplemented
        return self._cmp(other) < 0

    __hash__ = None

    def __repr__(self):
        if self.poly is None:
            return f"Instant({self.lo})"
        return f"Instant(~{float(self):.15g})"


def as_instant(t) -> Instant:
    if isinstance(t, Instant):
        return t
    if isinstance(t, float):
        return Instant(Q(t))
    return Instant(t)


def rational_between(a: Instant, b: Optional[Instant], cap) -> Optional[Fraction]:
    """A rational strictly inside (a, b) and at most ``cap`` past ``a``; None if a >= b."""
    cap = Q(cap)
    if b is not None:
        if not a < b:
            return None
        while a.hi >= b.lo:
            if a.poly is not None and (b.poly is None or a.hi - a.lo >= b.hi - b.lo):
                a.refine()
            else:
                b.refine()
    lo = a.hi
    hi = lo + cap if b is None else min(b.lo, lo + cap)
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# signs at instants


def _certified_sign(c: tuple, lo: Fraction, hi: Fraction) -> int:
    mid = (lo + hi) / 2
    fm = _horner(c, mid)
    r = max(abs(lo), abs(hi))
    lip = 0
    rp = 1
    for k in range(1, len(c)):
        lip += k * abs(c[k]) * rp
        rp *= r
    if abs(fm) * 2 > lip * (hi - lo):
        return _sgn(fm)
    return 0


def sign_at(p: Polynomial, t: Instant) -> int:
    """Exact sign of ``p`` at time ``t``."""
    c = p.coeffs
    if not c:
        return 0
    if len(c) == 1:
        return _sgn(c[0])
    if t.poly is None:
        return _sgn(_horner(c, t.lo))
    zero_checked = False
    for _ in range(_MAX_BISECT):
        if t.poly is None:
            return _sgn(_horner(c, t.lo))
        s = _certified_sign(c, t.lo, t.hi)
        if s:
            return s
        if not zero_checked:
            zero_checked = True
            g = poly_gcd(t.poly, p)
            if g.degree > 0 and _sgn(g(t.lo)) != _sgn(g(t.hi)):
                return 0
        t.refine()
    raise DegenerateRootError(p, (t.lo, t.hi))


def right_sign(p: Polynomial, t: Instant) -> int:
    """Sign of ``p`` on (t, t + h) for all small h > 0; 0 only for the zero polynomial."""
    while not p.is_zero:
        s = sign_at(p, t)
        if s:
            return s
        p = p.derivative()
    return 0


# ---------------------------------------------------------------------------
# root isolation


def _isolate_bisect(g: Polynomial, lo: Fraction, hi: Fraction) -> list:
    """Isolate all roots of square-free ``g`` in (lo, hi] by Sturm bisection."""
    seq = sturm_sequence(g)
    out = []
    stack = [(lo, hi, _variations(seq, lo) - _variations(seq, hi))]
    steps = 0
    while stack:
        a, b, k = stack.pop()
        steps += 1
        if steps > 20 * _MAX_BISECT:
            raise DegenerateRootError(g, (a, b))
        if k == 0:
            continue
        if k == 1:
            if g(b) == 0:
                out.append(Instant(b))
                continue
            if g(a) != 0:
                out.append(Instant.root(g, a, b))
                continue
        m = (a + b) / 2
        vm = _variations(seq, m)
        va = _variations(seq, a)
        stack.append((a, m, va - vm))
        stack.append((m, b, k - (va - vm)))
    out.sort()
    return out


def _verified_intervals(g: Polynomial, guesses: list) -> Optional[list]:
    out = []
    for r in sorted(guesses):
        w = ROOT_TOL * max(1.0, abs(r))
        ok = False
        for _ in range(4):
            lo, hi = Q(r - w), Q(r + w)
            slo, shi = _sgn(g(lo)), _sgn(g(hi))
            if slo * shi < 0:
                ok = True
                break
            if slo == 0:
                out.append(Instant(lo))
                ok = None
                break
            if shi == 0:
                out.append(Instant(hi))
                ok = None
                break
            w *= 1000
        if ok is False:
            return None
        if ok:
            if out and out[-1].hi >= lo:
                return None
            out.append(Instant.root(g, lo, hi))
    return out


def real_roots(g: Polynomial) -> list:
    """Sorted isolated real roots of a square-free polynomial."""
    c = g.coeffs
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [Instant(-c[0] / c[1])]
    if deg == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4 * a * cc
        if disc < 0:
            return []
        num, den = disc.numerator, disc.denominator
        sn, sd = math.isqrt(num), math.isqrt(den)
        if sn * sn == num and sd * sd == den:
            sq = Q(sn, sd)
            return sorted([Instant((-b - sq) / (2 * a)), Instant((-b + sq) / (2 * a))])
        fa, fb, fd = float(a), float(b), math.sqrt(float(disc))
        q = -0.5 * (fb + math.copysign(fd, fb))
        guesses = [q / fa, float(cc) / q] if q != 0 else [-fb / (2 * fa)]
        res = _verified_intervals(g, guesses) if len(guesses) == 2 else None
        if res is not None and len(res) == 2:
            return res
        bound = _cauchy_bound(g)
        return _isolate_bisect(g, -bound, bound)
    # degree >= 3: float guesses verified against the exact Sturm count
    seq = sturm_sequence(g)
    bound = _cauchy_bound(g)
    total = _variations(seq, -bound) - _variations(seq, bound)
    if total == 0:
        return []
    try:
        z = np.roots(g.as_float()[::-1])
        guesses = sorted(float(x.real) for x in z if abs(x.imag) <= 1e-7 * max(1.0, abs(x)))
    except (np.linalg.LinAlgError, ValueError):
        guesses = []
    if len(guesses) == total:
        res = _verified_intervals(g, guesses)
        if res is not None and len(res) == total:
            return res
    return _isolate_bisect(g, -bound, bound)


def next_sign_change(p: Polynomial, t0) -> Optional[Instant]:
    """Smallest time strictly after ``t0`` at which ``p`` changes sign."""
    if p.is_zero or p.degree == 0:
        return None
    t0 = as_instant(t0)
    g = odd_multiplicity_part(p)
    if g.degree == 0:
        return None
    c = g.coeffs
    if len(c) == 2:
        r = Instant(-c[0] / c[1])
        return r if r > t0 else None
    for r in real_roots(g):
        if r > t0:
            return r
    return None


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    """A moving point: one polynomial per Cartesian coordinate."""

    point_id: int
    coords: tuple

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def degree(self) -> int:
        return max((c.degree for c in self.coords), default=0)

    def position(self, t) -> tuple:
        if isinstance(t, Instant):
            if not t.is_exact:
                raise ValueError("exact position needs an exact time")
            t = t.lo
        t = Q(t)
        return tuple(Q(c(t)) for c in self.coords)

    def position_float(self, t: float) -> tuple:
        return tuple(float(np.polyval(c.as_float()[::-1], t)) if c.coeffs else 0.0 for c in self.coords)


def make_trajectory(point_id: int, coords: Sequence[Sequence]) -> Trajectory:
    return Trajectory(point_id, tuple(Polynomial(c) for c in coords))


def project(a: Trajectory, axis: Sequence) -> Polynomial:
    """Coordinate of ``a`` along ``axis`` as a polynomial in time."""
    acc = [Q(0)] * (a.degree + 1)
    for c, u in zip(a.coords, axis):
        if u:
            u = Q(u)
            for k, x in enumerate(c.coeffs):
                acc[k] += x * u
    return Polynomial._raw(_trim(acc))


def diff_along_axis(a: Trajectory, b: Trajectory, axis: Sequence) -> Polynomial:
    if a.dim != b.dim:
        raise ValueError("trajectories differ in dimension")
    out = ZERO
    for ca, cb, u in zip(a.coords, b.coords, axis):
        if u:
            out = out + (ca - cb) * u
    return out


def squared_distance_poly(a: Trajectory, b: Trajectory) -> Polynomial:
    if a.dim != b.dim:
        raise ValueError("trajectories differ in dimension")
    out = ZERO
    for ca, cb in zip(a.coords, b.coords):
        diff = ca - cb
        out = out + diff * diff
    return out
