import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from semiyao_kds.ann import AnnKDS, build_all
from semiyao_kds.cones import build_cone_family
from semiyao_kds.kinetic import EventQueue
from semiyao_kds.motion import make_trajectory
from semiyao_kds.oracle import Oracle, brute_all_nn
from semiyao_kds.scenario import generate_scenario
from semiyao_kds.sygraph import EdgeChange, SemiYaoKDS, build_static

FAM = build_cone_family(2, math.pi / 3)


def static(pid, x, y):
    return make_trajectory(pid, [[x], [y]])


def kds(points):
    q = EventQueue()
    sy = SemiYaoKDS(points, FAM, q)
    return q, sy, AnnKDS(sy, q)


def test_two_points_are_mutual():
    pts = [static(0, 0, 0), static(1, 3, 4)]
    assert build_all(pts, build_static(pts, FAM)) == {0: 1, 1: 0}
    _, _, ann = kds(pts)
    assert ann.all_nearest() == {0: 1, 1: 0}
    assert ann.closest_pair() == (0, 1)


def test_singleton_and_empty():
    _, _, ann = kds([static(5, 0, 0)])
    assert ann.nearest(0) is None
    assert ann.closest_pair() is None
    _, _, ann = kds([])
    assert ann.closest_pair() is None


def test_equidistant_tie_goes_to_lower_id():
    pts = [static(0, -1, 0), static(1, 0, 0), static(2, 1, 0)]
    assert build_all(pts, build_static(pts, FAM))[1] == 0
    _, _, ann = kds(pts)
    assert ann.all_nearest()[1] == 0


def test_closest_pair_ignores_outlier():
    _, _, ann = kds([static(0, 0, 0), static(1, 1, 0), static(2, 100, 100)])
    assert ann.closest_pair() == (0, 1)


def test_build_all_matches_oracle():
    for seed in range(3):
        scn = generate_scenario(200, seed=seed)
        assert build_all(scn.points, build_static(scn.points, FAM)) == brute_all_nn(scn.points)


def test_insert_then_delete_restores_tables():
    q, sy, ann = kds([static(i, i, (i * i) % 5) for i in range(6)])
    before = ann.all_nearest()
    ch = EdgeChange("insert", 0, 5, 1, q.t_now)
    ann.on_edge_change(ch)
    ann.on_edge_change(EdgeChange("delete", 0, 5, 1, q.t_now))
    assert ann.all_nearest() == before
    assert ann.audit() == []


def test_deleting_nn_edge_falls_back_to_runner_up():
    pts = [static(0, 0, 0), static(1, 1, 0), static(2, 0, 2)]
    q, sy, ann = kds(pts)
    assert ann.nearest(0) == 1
    refs = ann.ref[(0, 1)]
    for _ in range(refs):
        ann.on_edge_change(EdgeChange("delete", 0, 1, 1, q.t_now))
    assert ann.nearest(0) == 2


def test_delete_of_absent_edge_is_rejected():
    q, sy, ann = kds([static(0, 0, 0), static(1, 1, 0), static(2, 50, 50)])
    with pytest.raises(AssertionError):
        ann.on_edge_change(EdgeChange("delete", 0, 2, 1, q.t_now))


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_kinetic_nn_follows_oracle(seed, degree):
    scn = generate_scenario(16, degree=degree, seed=seed, speed=0.5)
    q, sy, ann = kds(scn.points)
    oracle = Oracle(scn.points)
    for k in range(1, 5):
        t = F(k, 4) - F(1, 1009)
        q.run_until(t)
        assert ann.all_nearest() == oracle.all_nn(t)
    assert ann.audit() == []


def test_nn_edges_lie_in_semi_yao_graph():
    for seed in range(5):
        scn = generate_scenario(100, seed=seed)
        g = build_static(scn.points, FAM)
        und = {frozenset((w, t)) for (w, _), t in g.items()}
        for p, q in brute_all_nn(scn.points).items():
            assert frozenset((p, q)) in und
