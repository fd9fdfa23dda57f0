import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilctiling.engine import (
    GuardExceeded,
    InvalidRuleError,
    check_disjoint,
    count_vector,
    inflate,
    inflate_patch,
    supertile,
)
from ilctiling.exactring import CycInt, mu, zeta_pow
from ilctiling.symmetry import Isometry, transform_patch
from ilctiling.tiles import Patch, PlacedTile, edge_type_census, place, vertices


def test_canonical_inflation_is_the_rule(rule13):
    for k in rule13.ks:
        assert inflate(rule13, place(13, k)).keys() == rule13.patch(k).keys()


def test_empty_and_order_zero(rule13):
    assert len(inflate_patch(rule13, Patch.empty(13))) == 0
    assert len(supertile(rule13, 3, 0)) == 1


@given(st.integers(1, 6), st.integers(0, 51), st.booleans(), st.integers(0, 51), st.integers(-2, 2))
@settings(max_examples=25)
def test_inflation_equivariant(rule13, k, r, f, a, c):
    g = Isometry(13, r, f, zeta_pow(13, a) * c)
    g_mu = Isometry(13, r, f, g.shift * mu(13))
    t = Patch.from_tiles(13, [place(13, k)])
    lhs = inflate_patch(rule13, transform_patch(t, g))
    rhs = transform_patch(inflate_patch(rule13, t), g_mu)
    assert lhs.key_set() == rhs.key_set()
    assert len(lhs) == len(rule13.tiles[k])


def test_corners_scale(rule13):
    t = PlacedTile(13, 4, 7, True, zeta_pow(13, 5))
    child = inflate(rule13, t)
    pts = {v.coeffs for c in child for v in vertices(c)}
    for v in vertices(t):
        assert (v * mu(13)).coeffs in pts
    assert child.area() == pytest.approx(float(mu(13)) ** 2 * t.proto.area(), rel=1e-10)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_count_recursion(rule13, order):
    C = rule13.count_matrix()
    for k in (1, 4):
        p = supertile(rule13, k, order)
        want = np.linalg.matrix_power(C, order)[:, k - 1]
        assert list(p.counts()[1:]) == list(want)
        assert list(count_vector(rule13, k, order)[1:]) == list(want)


def test_supertile_disjoint(rule13):
    check_disjoint(supertile(rule13, 2, 2))


def test_overlap_rejected():
    p = Patch.from_tiles(13, [place(13, 2), place(13, 2, 1)])
    with pytest.raises(InvalidRuleError):
        check_disjoint(p)


def test_guard(rule13):
    with pytest.raises(GuardExceeded):
        supertile(rule13, 1, 6, max_tiles=1000)


def test_order2_tile_count_is_sum_of_children(rule13):
    one = supertile(rule13, 5, 1)
    two = supertile(rule13, 5, 2)
    assert len(two) == sum(len(rule13.tiles[int(k)]) for k in one.k)


def test_edge_types_grow(rule13):
    counts = [len(edge_type_census(supertile(rule13, 1, r))) for r in (1, 2)]
    assert counts[0] < counts[1]
