"""Plain-text scenario files.

::

    # comments start with '#'
    dim 2
    degree 1
    theta pi/3
    eps 1/5
    horizon 1
    seed 7
    point 0 | 1/2 3/1024 | 5/8 -1/16

Each ``point`` line gives an id and one coefficient list per coordinate,
constant term first.  Numbers are integers or ``num/den``; the angle may also
be written ``pi/k``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .motion import Trajectory, make_trajectory

MAX_DEGREE = 4
_NUMBER = re.compile(r"^[+-]?\d+(/\d+)?$")
_DECIMAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class ScenarioError(ValueError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col, self.msg = line, col, msg


@dataclass
class Scenario:
    dim: int = 2
    degree: int = 1
    theta: Optional[str] = None        # kept as written, e.g. "pi/3"
    eps: Optional[Fraction] = None
    horizon: Fraction = Fraction(1)
    seed: Optional[int] = None
    points: list = field(default_factory=list)

    @property
    def theta_value(self) -> Optional[float]:
        return None if self.theta is None else parse_angle(self.theta)


def parse_number(tok: str) -> Fraction:
    if _NUMBER.match(tok):
        return Fraction(tok)
    raise ValueError(f"malformed number {tok!r}")


def parse_angle(text: str) -> float:
    t = text.strip().replace(" ", "")
    if t == "pi":
        return math.pi
    m = re.fullmatch(r"pi/(\d+)", t)
    if m:
        k = int(m.group(1))
        if k == 0:
            raise ValueError("angle pi/0")
        return math.pi / k
    if _DECIMAL.match(t):
        return float(t)
    raise ValueError(f"malformed angle {text!r}")


def _parse_header_number(tok: str) -> Fraction:
    if _NUMBER.match(tok):
        return Fraction(tok)
    if _DECIMAL.match(tok):
        return Fraction(tok)
    raise ValueError(f"malformed number {tok!r}")


def parse_scenario(text: str) -> Scenario:
    scn = Scenario()
    seen_points = False
    ids = set()
    raw_points = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        col0 = len(body) - len(body.lstrip()) + 1
        parts = body.split()
        key = parts[0]
        if key == "point":
            seen_points = True
            raw_points.append((ln, body))
            continue
        if seen_points:
            raise ScenarioError(ln, col0, "header line after point records")
        if len(parts) != 2:
            raise ScenarioError(ln, col0, f"expected '{key} <value>'")
        val = parts[1]
        vcol = body.index(val, col0 - 1 + len(key)) + 1
        try:
            if key == "dim":
                scn.dim = int(val)
                if scn.dim not in (2, 3):
                    raise ValueError(f"dimension {scn.dim} not supported (only 2 and 3)")
            elif key == "degree":
                scn.degree = int(val)
                if not 0 <= scn.degree <= MAX_DEGREE:
                    raise ValueError(f"degree {scn.degree} outside 0..{MAX_DEGREE}")
            elif key == "theta":
                parse_angle(val)
                scn.theta = val
            elif key == "eps":
                scn.eps = _parse_header_number(val)
                if scn.eps <= 0:
                    raise ValueError("eps must be positive")
            elif key == "horizon":
                scn.horizon = _parse_header_number(val)
                if scn.horizon < 0:
                    raise ValueError("horizon must be non-negative")
            elif key == "seed":
                scn.seed = int(val)
            else:
                raise ScenarioError(ln, col0, f"unknown header key {key!r}")
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(ln, vcol, str(exc)) from None
    for ln, body in raw_points:
        scn.points.append(_parse_point(ln, body, scn, ids))
    return scn


def _parse_point(ln: int, body: str, scn: Scenario, ids: set) -> Trajectory:
    fields = body.split("|")
    head = fields[0].split()
    head_col = body.index("point") + 1
    if len(head) != 2:
        raise ScenarioError(ln, head_col, "expected 'point <id> | coords ...'")
    try:
        pid = int(head[1])
    except ValueError:
        raise ScenarioError(ln, body.index(head[1]) + 1, f"malformed id {head[1]!r}") from None
    if pid in ids:
        raise ScenarioError(ln, body.index(head[1]) + 1, f"duplicate point id {pid}")
    ids.add(pid)
    if len(fields) - 1 != scn.dim:
        raise ScenarioError(ln, head_col, f"expected {scn.dim} coordinates, found {len(fields) - 1}")
    coords = []
    offset = len(fields[0]) + 1
    for f in fields[1:]:
        coeffs = []
        pos = 0
        first_col = offset + len(f) - len(f.lstrip()) + 1
        for tok in f.split():
            pos = f.index(tok, pos)
            col = offset + pos + 1
            pos += len(tok)
            try:
                coeffs.append(parse_number(tok))
            except ValueError as exc:
                raise ScenarioError(ln, col, str(exc)) from None
        if not coeffs:
            raise ScenarioError(ln, offset + 1, "empty coordinate")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) - 1 > scn.degree:
            raise ScenarioError(ln, first_col, f"coordinate of degree {len(coeffs) - 1} exceeds declared degree {scn.degree}")
        coords.append(coeffs)
        offset += len(f) + 1
    return make_trajectory(pid, coords)


def _fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def serialize_scenario(scn: Scenario) -> str:
    lines = [f"dim {scn.dim}", f"degree {scn.degree}"]
    if scn.theta is not None:
        lines.append(f"theta {scn.theta}")
    if scn.eps is not None:
        lines.append(f"eps {_fmt(scn.eps)}")
    lines.append(f"horizon {_fmt(scn.horizon)}")
    if scn.seed is not None:
        lines.append(f"seed {scn.seed}")
    for tr in sorted(scn.points, key=lambda t: t.point_id):
        coords = " | ".join(" ".join(_fmt(a) for a in (c.coeffs or (0,))) for c in tr.coords)
        lines.append(f"point {tr.point_id} | {coords}")
    return "\n".join(lines) + "\n"


def generate_scenario(n: int, dim: int = 2, degree: int = 1, seed: int = 0, theta: Optional[str] = "pi/3",
                      eps=None, horizon=1, speed: float = 0.25, grid: int = 1024) -> Scenario:
    """Random dyadic trajectories: start in the unit box, bounded velocity and acceleration."""
    if dim not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree outside 0..{MAX_DEGREE}")
    rng = np.random.default_rng(seed)
    pts = []
    for pid in range(n):
        coords = []
        for _ in range(dim):
            c = [Fraction(int(rng.integers(0, grid + 1)), grid)]
            scale = speed
            for _k in range(1, degree + 1):
                m = max(1, int(round(scale * grid)))
                c.append(Fraction(int(rng.integers(-m, m + 1)), grid))
                scale /= 2
            coords.append(c)
        pts.append(make_trajectory(pid, coords))
    return Scenario(dim=dim, degree=degree, theta=theta,
                    eps=None if eps is None else Fraction(str(eps)),
                    horizon=Fraction(horizon), seed=seed, points=pts)
