import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from dtieval.intervals import Interval, IntervalSet, MERGE_EPS, union_all


def iset(*pairs):
    return IntervalSet.from_pairs(pairs)


class TestBasics:
    def test_union_overlapping(self):
        u = iset((0, 10)).union(iset((5, 20)))
        assert u.to_pairs() == [(0, 20)]
        assert u.duration == 20

    def test_subtract_middle(self):
        s = iset((0, 10)).subtract(iset((3, 5)))
        assert s.to_pairs() == [(0, 3), (5, 10)]
        assert s.duration == 8

    def test_intersect(self):
        s = iset((0, 10), (20, 30)).intersect(iset((5, 25)))
        assert s.to_pairs() == [(5, 10), (20, 25)]

    def test_empty(self):
        assert not IntervalSet.empty()
        assert IntervalSet.empty().duration == 0
        with pytest.raises(ValueError):
            IntervalSet.empty().start

    def test_invalid_interval(self):
        with pytest.raises(ValueError):
            Interval(5, 3)

    def test_merge_epsilon(self):
        # gaps at or below the merge epsilon close up
        s = iset((0, 1), (1 + 0.5 * MERGE_EPS, 2))
        assert len(s.intervals) == 1
        # slivers at or below the epsilon vanish
        assert not iset((0, MERGE_EPS))

    def test_contains(self):
        s = iset((0, 1), (2, 3))
        assert s.contains(0.5)
        assert not s.contains(1.5)
        assert s.contains(1.5, tol=0.6)

    def test_union_all(self):
        s = union_all([iset((0, 1)), iset((0.5, 2)), IntervalSet.empty()])
        assert s.to_pairs() == [(0, 2)]


def random_pairs(rng, n_max=8, span_ms=20000):
    n = int(rng.integers(0, n_max + 1))
    pairs = []
    for _ in range(n):
        a = int(rng.integers(0, span_ms))
        b = int(rng.integers(a + 1, span_ms + 1))
        pairs.append((a / 1000, b / 1000))
    return pairs


def test_grid_oracle_equivalence_sample():
    rng = np.random.default_rng(7)
    for _ in range(200):
        pa, pb = random_pairs(rng), random_pairs(rng)
        a, b = IntervalSet.from_pairs(pa), IntervalSet.from_pairs(pb)
        lo, hi = oracles.grid_bounds(pa, pb, [(0, 0.001)])
        ra, rb = oracles.raster(pa, lo, hi), oracles.raster(pb, lo, hi)
        assert a.union(b).duration == pytest.approx(
            oracles.grid_duration(ra | rb), abs=1e-3
        )
        assert a.intersect(b).duration == pytest.approx(
            oracles.grid_duration(ra & rb), abs=1e-3
        )
        assert a.subtract(b).duration == pytest.approx(
            oracles.grid_duration(ra & ~rb), abs=1e-3
        )


pair_list = st.lists(
    st.tuples(st.integers(0, 5000), st.integers(1, 5000)).map(
        lambda ab: (ab[0] / 1000, (ab[0] + ab[1]) / 1000)
    ),
    max_size=6,
)


@settings(max_examples=200, deadline=None)
@given(pair_list, pair_list)
def test_inclusion_exclusion(pa, pb):
    a, b = IntervalSet.from_pairs(pa), IntervalSet.from_pairs(pb)
    lhs = a.union(b).duration
    rhs = a.duration + b.duration - a.intersect(b).duration
    assert lhs == pytest.approx(rhs, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(pair_list, pair_list)
def test_subtract_properties(pa, pb):
    a, b = IntervalSet.from_pairs(pa), IntervalSet.from_pairs(pb)
    diff = a.subtract(b)
    assert diff.intersect(b).duration <= 1e-9
    assert diff.union(a.intersect(b)).duration == pytest.approx(a.duration, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(pair_list)
def test_canonical_form(pa):
    s = IntervalSet.from_pairs(pa)
    for u, v in zip(s.intervals, s.intervals[1:]):
        assert v.start - u.end > MERGE_EPS
    assert s.union(s) == s
    assert s.intersect(s) == s
