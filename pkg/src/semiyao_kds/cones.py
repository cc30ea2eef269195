"""Polyhedral cone families partitioning directions around an apex.

Every cone is simplicial: ``d`` inward normals (one per bounding half-space)
and an axis used for the projection order.  All vectors are exact rationals, so
cones that share a facet carry exactly opposite normals and the family tiles
R^d minus the apex.

Points on a shared boundary, and coincident points, are resolved by a symbolic
perturbation: point ``i`` is displaced by ``i * eps * g`` for a fixed generic
direction ``g``.  Along any axis ``u`` an exact coordinate tie is therefore
broken by ``id * sign(<g, u>)``.  The same rule orders every sorted list.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .motion import Instant, Trajectory, as_instant

# generic perturbation direction; asserted off every normal and axis hyperplane
PERTURBATION = (Fraction(1), Fraction(3141, 10007), Fraction(2718, 9973))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _unit(v) -> np.ndarray:
    x = np.array([float(c) for c in v])
    return x / np.linalg.norm(x)


def _angle(a, b) -> float:
    return float(np.arccos(np.clip(np.dot(_unit(a), _unit(b)), -1.0, 1.0)))


@dataclass(frozen=True)
class Cone:
    index: int              # label, 1..c
    normals: tuple          # d inward normals (exact rationals, not normalised)
    axis: tuple             # direction of the projection axis (exact)
    rays: tuple             # d extreme rays (exact)
    tie_signs: tuple        # sign(<g, u>) for each normal, then for the axis

    @property
    def axis_unit(self) -> np.ndarray:
        return _unit(self.axis)

    def opening_angle(self) -> float:
        return max((_angle(a, b) for a, b in itertools.combinations(self.rays, 2)), default=0.0)

    def axis_angle(self) -> float:
        """Largest angle between the axis and an extreme ray."""
        return max(_angle(self.axis, r) for r in self.rays)


@dataclass(frozen=True)
class ConeFamily:
    dim: int
    theta: float
    cones: tuple
    for_nn: bool = True
    subdivision: int = field(default=0)

    def __len__(self) -> int:
        return len(self.cones)

    @property
    def c(self) -> int:
        return len(self.cones)

    @property
    def labels(self) -> range:
        return range(1, len(self.cones) + 1)

    def cone(self, l: int) -> Cone:
        """Cone with label ``l`` (labels run 1..c)."""
        if not 1 <= l <= len(self.cones):
            raise IndexError(f"cone label {l} outside 1..{len(self.cones)}")
        return self.cones[l - 1]

    def max_axis_angle(self) -> float:
        return max(cone.axis_angle() for cone in self.cones)

    def dump(self) -> str:
        lines = []
        for cone in self.cones:
            normals = " ".join("(" + ",".join(f"{float(x):.6f}" for x in _unit(u)) + ")" for u in cone.normals)
            axis = ",".join(f"{x:.6f}" for x in cone.axis_unit)
            lines.append(f"cone {cone.index}: normals {normals} axis ({axis})")
        return "\n".join(lines)


def _tie_signs(normals, axis) -> tuple:
    d = len(axis)
    g = PERTURBATION[:d]
    signs = []
    for v in (*normals, axis):
        s = _dot(g, v)
        if s == 0:
            raise ValueError("perturbation direction is not generic for this family")
        signs.append(1 if s > 0 else -1)
    return tuple(signs)


def _snap(x: float) -> Fraction:
    # exact zeros and halves where the float is only rounding noise
    return Fraction(x).limit_denominator(10**12)


def _rational_unit_dir(angle: float) -> tuple:
    return (_snap(math.cos(angle)), _snap(math.sin(angle)))


def _planar_family(theta: float, for_nn: bool) -> ConeFamily:
    c = math.ceil(2 * math.pi / theta - 1e-9)
    step = 2 * math.pi / c
    rays = []
    for k in range(c):
        if c % 2 == 0 and k >= c // 2:
            x, y = rays[k - c // 2]
            rays.append((-x, -y))
        elif k == 0:
            rays.append((Fraction(1), Fraction(0)))
        else:
            rays.append(_rational_unit_dir(k * step))
    cones = []
    for k in range(c):
        lo, hi = rays[k], rays[(k + 1) % c]
        normals = ((-lo[1], lo[0]), (hi[1], -hi[0]))
        if c % 2 == 0 and k >= c // 2:
            ax = cones[k - c // 2].axis
            axis = (-ax[0], -ax[1])
        else:
            axis = _rational_unit_dir((k + 0.5) * step)
        cones.append(Cone(k + 1, normals, axis, (lo, hi), _tie_signs(normals, axis)))
    return ConeFamily(2, theta, tuple(cones), for_nn)


def _cube_vertices(k: int):
    grid = [Fraction(-1) + Fraction(2 * i, k) for i in range(k + 1)]
    for axis in range(3):
        for sign in (1, -1):
            for i in range(k):
                for j in range(k):
                    def vert(a, b, axis=axis, sign=sign):
                        v = [None, None, None]
                        v[axis] = Fraction(sign)
                        others = [x for x in range(3) if x != axis]
                        v[others[0]], v[others[1]] = a, b
                        return tuple(v)
                    yield (vert(grid[i], grid[j]), vert(grid[i + 1], grid[j]),
                           vert(grid[i + 1], grid[j + 1]), vert(grid[i], grid[j + 1]))


def _max_pair_angle(rays) -> float:
    return max(_angle(a, b) for a, b in itertools.combinations(rays, 2))


def _axis_margin(rays, axis) -> float:
    """min over ray pairs of |w_i| - |w_i - w_j| on the unit-height cap."""
    a = _unit(axis)
    w = []
    for r in rays:
        u = _unit(r)
        h = float(np.dot(u, a))
        if h <= 0:
            return -1.0
        w.append(u / h)
    return min(np.linalg.norm(w[i]) - np.linalg.norm(w[i] - w[j])
               for i in range(len(w)) for j in range(len(w)) if i != j)


def _simplicial_axis(rays) -> tuple:
    """Interior axis equiangular to the extreme rays when possible."""
    R = np.array([_unit(r) for r in rays])
    normals = [np.cross(R[1], R[2]), np.cross(R[2], R[0]), np.cross(R[0], R[1])]
    normals = [n * np.sign(np.dot(n, R[i])) for i, n in enumerate(normals)]
    cand = np.linalg.solve(R, np.ones(3))
    cand /= np.linalg.norm(cand)
    if min(np.dot(n, cand) for n in normals) <= 1e-3:
        best = None
        steps = 40
        for i in range(1, steps):
            for j in range(1, steps - i):
                wts = np.array([i, j, steps - i - j], dtype=float) / steps
                a = wts @ R
                m = _axis_margin(rays, a)
                if best is None or m > best[0]:
                    best = (m, a / np.linalg.norm(a))
        cand = best[1]
    return tuple(Fraction(float(x)).limit_denominator(10**9) for x in cand)


def _spatial_family(theta: float, for_nn: bool) -> ConeFamily:
    for k in range(2, 64):
        tris = []
        for a, b, c, d in _cube_vertices(k):
            # pick the diagonal giving the smaller triangles
            t1 = [(a, b, c), (a, c, d)]
            t2 = [(a, b, d), (b, c, d)]
            m1 = max(_max_pair_angle(t) for t in t1)
            m2 = max(_max_pair_angle(t) for t in t2)
            tris.extend(t1 if m1 <= m2 + 1e-12 else t2)
        if max(_max_pair_angle(t) for t in tris) <= theta + 1e-12:
            break
    else:
        raise ValueError("angle too small for the cube triangulation")
    cones = []
    for idx, rays in enumerate(tris):
        normals = []
        for i in range(3):
            n = _cross(rays[(i + 1) % 3], rays[(i + 2) % 3])
            if _dot(n, rays[i]) < 0:
                n = tuple(-x for x in n)
            normals.append(n)
        axis = _simplicial_axis(rays)
        if min(_dot(n, axis) for n in normals) <= 0:
            raise ValueError("cone axis is not interior")
        cones.append(Cone(idx + 1, tuple(normals), axis, tuple(rays), _tie_signs(normals, axis)))
    return ConeFamily(3, theta, tuple(cones), for_nn, subdivision=k)


def build_cone_family(d: int, theta: float = math.pi / 3, for_nn: bool = True) -> ConeFamily:
    """Cones of opening angle at most ``theta`` covering R^d (d in {2, 3})."""
    if d not in (2, 3):
        raise ValueError(f"dimension {d} not supported (only 2 and 3)")
    if not theta > 0:
        raise ValueError("theta must be positive")
    if for_nn and theta > math.pi / 3 + 1e-12:
        raise ValueError("nearest-neighbour use needs theta <= pi/3")
    if d == 2:
        return _planar_family(theta, for_nn)
    return _spatial_family(theta, for_nn)


# ---------------------------------------------------------------------------
# membership


def axis_key(coord, point_id: int, tie_sign: int):
    """Sort key along one axis under the perturbation rule."""
    return (coord, tie_sign * point_id)


def _precedes(apex_pos, apex_id, q_pos, q_id, vec, sign) -> bool:
    a, b = _dot(apex_pos, vec), _dot(q_pos, vec)
    if a != b:
        return a < b
    return sign * apex_id < sign * q_id


def contains(family: ConeFamily, l: int, apex, q, apex_id: int = 0, q_id: int = 1) -> bool:
    """True iff q lies in the translated cone ``l`` with apex at ``apex``."""
    if apex_id == q_id and tuple(apex) == tuple(q):
        raise ValueError("apex and query point must differ")
    cone = family.cone(l)
    apex = [Fraction(x) for x in apex]
    q = [Fraction(x) for x in q]
    return all(_precedes(apex, apex_id, q, q_id, u, s)
               for u, s in zip(cone.normals, cone.tie_signs))


def reflected_contains(family: ConeFamily, l: int, apex, q, apex_id: int = 0, q_id: int = 1) -> bool:
    """True iff q lies in the reflection of cone ``l`` through ``apex``."""
    return contains(family, l, q, apex, q_id, apex_id)


def cone_index(family: ConeFamily, apex, q, apex_id: int = 0, q_id: int = 1) -> int:
    hits = [l for l in family.labels if contains(family, l, apex, q, apex_id, q_id)]
    if len(hits) != 1:
        raise AssertionError(f"partition violated: {hits}")
    return hits[0]


def cone_of(family: ConeFamily, apex: Trajectory, q: Trajectory, t) -> int:
    t = as_instant(t)
    if not t.is_exact:
        raise ValueError("cone_of needs an exact time")
    return cone_index(family, apex.position(t), q.position(t), apex.point_id, q.point_id)
