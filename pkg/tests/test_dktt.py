import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from semiyao_kds.dktt import Dktt
from semiyao_kds.kinetic import EventQueue
from semiyao_kds.motion import Polynomial, right_sign


def argmin(tree, t):
    best = None
    for e in sorted(tree.val):
        if best is None:
            best = e
            continue
        s = right_sign(tree.val[best] - tree.val[e], t)
        if s > 0 or (s == 0 and e < best):
            best = e
    return best


def test_empty_and_singleton():
    q = EventQueue()
    t = Dktt(q)
    assert t.winner() is None
    t.insert(7, Polynomial([3]))
    assert t.winner() == 7


def test_static_winner_is_argmin():
    rng = random.Random(0)
    t = Dktt(EventQueue())
    t.build((e, Polynomial([rng.randint(-1000, 1000)])) for e in range(100))
    assert t.winner() == argmin(t, t.queue.t_now)
    assert t.audit() == []


def test_insert_then_delete_restores_winner():
    q = EventQueue()
    t = Dktt(q)
    t.build((e, Polynomial([e % 7, 1])) for e in range(20))
    w = t.winner()
    t.insert(99, Polynomial([5]))
    t.delete(99)
    assert t.winner() == w and sorted(t.val) == list(range(20))


def test_delete_winner_gives_runner_up():
    t = Dktt(EventQueue())
    t.build((e, Polynomial([(e * 37) % 11, F(e, 3)])) for e in range(15))
    w = t.winner()
    t.delete(w)
    assert t.winner() == argmin(t, t.queue.t_now)


def test_dominating_insert_wins_at_once():
    t = Dktt(EventQueue())
    t.build((e, Polynomial([e + 1, 0, 1])) for e in range(10))
    t.insert(50, Polynomial([-1]))
    assert t.winner() == 50


def test_delete_absent_and_duplicate_insert():
    t = Dktt(EventQueue())
    t.insert(1, Polynomial([1]))
    with pytest.raises(KeyError):
        t.delete(2)
    with pytest.raises(ValueError):
        t.insert(1, Polynomial([0]))


def test_two_element_crossing_flips_winner():
    q = EventQueue()
    seen = []
    t = Dktt(q, on_winner_change=lambda a, b: seen.append((q.t_now, a, b)))
    t.build([(0, Polynomial([0, 1])), (1, Polynomial([1]))])
    assert t.winner() == 0
    q.run_until(2)
    assert t.winner() == 1
    assert seen[-1] == (1, 0, 1)


def test_deep_crossing_without_root_change():
    q = EventQueue()
    seen = []
    t = Dktt(q, on_winner_change=lambda a, b: seen.append((a, b)))
    # elements 1 and 2 cross at t=1, both far above element 0
    t.build([(0, Polynomial([-10])), (1, Polynomial([0, 1])), (2, Polynomial([1]))])
    q.run_until(2)
    assert q.stats.counts[2] >= 1
    assert seen == []


values = st.lists(st.fractions(-4, 4, max_denominator=8), min_size=1, max_size=3).map(Polynomial)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.sampled_from(["ins", "del", "adv"]), values, st.integers(0, 10**6)),
                min_size=1, max_size=60))
def test_random_operations_track_argmin(ops):
    q = EventQueue()
    t = Dktt(q)
    nxt, now = 0, F(0)
    for op, poly, r in ops:
        if op == "ins" or not t.val:
            t.insert(nxt, poly)
            nxt += 1
        elif op == "del":
            t.delete(sorted(t.val)[r % len(t.val)])
        else:
            now += F(r % 97 + 1, 64)
            q.run_until(now, on_event=lambda tt, c: None if q.peek_time() == tt
                        else _check(t, tt))
        _check(t, q.t_now)
        if len(t) > 1:
            assert t.height() <= 2 * math.log2(len(t)) + 2
    assert t.audit() == []


def _check(tree, t):
    assert tree.winner() == argmin(tree, t)
