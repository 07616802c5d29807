from fractions import Fraction as F
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from sparsedom.dyadic import (
    DyadicGrid,
    children,
    covering_cube,
    cube,
    parent,
    shifted_grids,
)
from sparsedom.errors import DyadicInputError

T0 = DyadicGrid.standard(1)
T3 = DyadicGrid(1, (F(1, 3),))


def test_cube_examples():
    assert cube(T0, 0, (0,)).bounds() == [(0, 1)]
    assert cube(T0, -1, (1,)).bounds() == [(F(1, 2), 1)]
    assert cube(T3, 0, (0,)).bounds() == [(F(1, 3), F(4, 3))]


def test_cube_dimension_mismatch():
    with pytest.raises(DyadicInputError):
        cube(T0, 0, (0, 0))


def test_volume_is_power_of_two():
    g = DyadicGrid.standard(2)
    for k in range(-4, 5):
        assert cube(g, k, (3, -2)).volume == F(2) ** (2 * k)


def test_endpoint_denominators():
    for g in shifted_grids(2):
        for k in range(-6, 7):
            for lo in cube(g, k, (5, -7)).lower:
                d = lo.denominator
                while d % 2 == 0:
                    d //= 2
                assert d in (1, 3)


def test_parent_examples():
    assert parent(cube(T0, -1, (0,))).bounds() == [(0, 1)]
    assert parent(cube(T0, -1, (1,))).bounds() == [(0, 1)]
    assert parent(cube(T3, 0, (0,))).bounds() == [(F(-2, 3), F(4, 3))]


def test_children_examples():
    assert [c.bounds() for c in children(cube(T0, 0, (0,)))] == [[(0, F(1, 2))], [(F(1, 2), 1)]]
    sq = children(cube(DyadicGrid.standard(2), 1, (0, 0)))
    assert sorted(tuple(c.lower) for c in sq) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(c.side == 1 for c in sq)
    kids = children(cube(T3, 1, (0,)))
    assert [c.bounds()[0] for c in kids] == [(F(-2, 3), F(1, 3)), (F(1, 3), F(4, 3))]
    assert [c.index for c in kids] == [(-1,), (0,)]


def test_shifted_grid_counts():
    assert len(shifted_grids(1)) == 2
    assert len(shifted_grids(2)) == 4
    assert shifted_grids(2)[0].is_standard


def test_bad_shift_rejected():
    with pytest.raises(DyadicInputError):
        DyadicGrid(1, (F(1, 5),))


@pytest.mark.parametrize("g", shifted_grids(1), ids=lambda g: g.label)
def test_nestedness_window_1d(g):
    # every level-k cube sits inside exactly one level-(k+1) cube
    for k in range(-6, 6):
        for m in range(-64, 65):
            c = cube(g, k, (m,))
            p = parent(c)
            assert p.contains(c)
            assert c in children(p)


def test_parent_children_duality_2d():
    for g in shifted_grids(2):
        for k in range(-3, 4):
            for idx in itertools.product(range(-3, 4), repeat=2):
                c = cube(g, k, idx)
                kids = children(c)
                assert c in children(parent(c))
                assert sum(x.volume for x in kids) == c.volume
                assert all(c.contains(x) for x in kids)
                assert all(not a.intersects(b) for a, b in itertools.combinations(kids, 2))


rationals = st.fractions(min_value=-40, max_value=40, max_denominator=3 * 2**8)


@settings(max_examples=300, deadline=None)
@given(x=rationals, y=rationals, k=st.integers(-6, 6), gi=st.integers(0, 3))
def test_partition_exactly_one_cube(x, y, k, gi):
    g = shifted_grids(2)[gi]
    c = g.locate(k, (x, y))
    assert c.contains_point((x, y))
    hits = [
        cube(g, k, (c.index[0] + a, c.index[1] + b))
        for a in (-1, 0, 1)
        for b in (-1, 0, 1)
    ]
    assert sum(h.contains_point((x, y)) for h in hits) == 1


@settings(max_examples=300, deadline=None)
@given(k1=st.integers(-6, 6), k2=st.integers(-6, 6), m1=st.integers(-40, 40), m2=st.integers(-40, 40),
       gi=st.integers(0, 1))
def test_pairwise_nested_or_disjoint(k1, k2, m1, m2, gi):
    g = shifted_grids(1)[gi]
    a, b = cube(g, k1, (m1,)), cube(g, k2, (m2,))
    assert (not a.intersects(b)) or a.contains(b) or b.contains(a)


def test_covering_examples():
    c, g = covering_cube([F(3, 10)], F(1, 2))
    assert c.bounds() == [(0, 2)] and g.is_standard
    c, g = covering_cube([0], 1)
    assert c.bounds() == [(0, 1)]
    c, g = covering_cube([F(9, 10)], F(1, 5))
    assert not g.is_standard and c.side <= F(6, 5)
    assert c.bounds() == [(F(1, 3), F(4, 3))]


def test_covering_random_2d():
    rng = random.Random(5)
    for _ in range(500):
        side = F(rng.randint(16, 2**16), 2**12)
        lo = (F(rng.randint(-10**5, 10**5), 3**rng.randint(0, 3) * 1000), F(rng.randint(-10**5, 10**5), 777))
        c, g = covering_cube(lo, side)
        assert c.side <= 6 * side
        assert all(a <= x and x + side <= b for x, (a, b) in zip(lo, c.bounds()))


def test_covering_rejects_bad_side():
    with pytest.raises(DyadicInputError):
        covering_cube([0], 0)
