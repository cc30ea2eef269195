from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from semiyao_kds.scenario import ScenarioError, generate_scenario, parse_scenario, serialize_scenario


def test_empty_point_list_is_valid():
    scn = parse_scenario("dim 2\ndegree 1\n")
    assert scn.points == []


def test_single_static_point():
    scn = parse_scenario("dim 2\ndegree 0\npoint 4 | 1/2 | -3\n")
    assert scn.points[0].position(0) == (F(1, 2), -3)


def test_header_and_comments():
    scn = parse_scenario("# demo\ndim 3\ndegree 2\ntheta pi/4\neps 1/5\nhorizon 2\nseed 9\n"
                         "point 0 | 0 1 | 1 | 0 0 1  # moving\n")
    assert (scn.dim, scn.degree, scn.theta, scn.eps, scn.horizon, scn.seed) == (3, 2, "pi/4", F(1, 5), 2, 9)


@pytest.mark.parametrize("text, line, col, fragment", [
    ("dim 2\ndegree 1\npoint 0 | 0 1 2 | 0\n", 3, 11, "exceeds declared degree"),
    ("dim 2\npoint 0 | 0 | 0\npoint 0 | 1 | 1\n", 3, 7, "duplicate point id"),
    ("dim 2\npoint 0 | 0.5 | 0\n", 2, 11, "malformed number"),
    ("dim 2\npoint 0 | 1 | 2 | 3\n", 2, 1, "expected 2 coordinates"),
    ("dim 2\npoint 0 | 1 | 2\ndegree 3\n", 3, 1, "header line after point"),
    ("dim 5\n", 1, 5, "not supported"),
    ("colour 2\n", 1, 1, "unknown header key"),
    ("degree 9\n", 1, 8, "outside"),
])
def test_errors_are_positioned(text, line, col, fragment):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(text)
    assert (err.value.line, err.value.col) == (line, col)
    assert fragment in str(err.value)


def test_generated_100_points_round_trip():
    scn = generate_scenario(100, dim=3, degree=2, seed=5, eps=0.2)
    text = serialize_scenario(scn)
    again = parse_scenario(text)
    assert serialize_scenario(again) == text
    assert [tr.coords for tr in again.points] == [tr.coords for tr in scn.points]


coef = st.fractions(-5, 5, max_denominator=32)


@given(st.lists(st.lists(coef, min_size=1, max_size=3), min_size=2, max_size=2), st.integers(0, 999))
def test_point_round_trip(coords, pid):
    text = f"dim 2\ndegree 2\npoint {pid} | " + " | ".join(
        " ".join(f"{c.numerator}/{c.denominator}" for c in cs) for cs in coords) + "\n"
    scn = parse_scenario(text)
    assert parse_scenario(serialize_scenario(scn)).points == scn.points
