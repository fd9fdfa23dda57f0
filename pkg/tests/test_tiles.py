import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ilctiling.exactring import CycInt, s_value, zeta_pow
from ilctiling.tiles import (
    Patch,
    PlacedTile,
    Prototile,
    adjacent_pairs,
    canonical_edge_type,
    find_misfit_vertices,
    place,
    share_segment,
    vertices,
)

N = 13


def poses(n=N):
    return st.builds(
        lambda k, r, f, a, b: PlacedTile(n, k, r, f, zeta_pow(n, a) * 2 + zeta_pow(n, b)),
        st.integers(1, (n - 1) // 2),
        st.integers(0, 4 * n - 1),
        st.booleans(),
        st.integers(0, 4 * n - 1),
        st.integers(0, 4 * n - 1),
    )


def isometries(n=N):
    return st.tuples(st.integers(0, 4 * n - 1), st.booleans(), st.integers(0, 4 * n - 1), st.integers(-2, 2))


def move(t, g):
    r, f, a, c = g
    shift = zeta_pow(t.n, a) * c
    if f:
        return PlacedTile(t.n, t.k, -t.rot + r, not t.reflected, t.trans.conj().rotate(r) + shift)
    return PlacedTile(t.n, t.k, t.rot + r, t.reflected, t.trans.rotate(r) + shift)


def test_prototile_range():
    with pytest.raises(ValueError):
        Prototile(13, 7)
    assert Prototile(13, 6).apex_angle == 1


@given(poses())
def test_vertex_distances(t):
    a, b, c = (v.embed() for v in vertices(t))
    assert abs(abs(c - a) ** 2 - 1) < 1e-10
    assert abs(abs(c - b) ** 2 - 1) < 1e-10
    assert abs(abs(b - a) ** 2 - float(s_value(N, t.k)) ** 2) < 1e-10


@given(poses(), isometries())
def test_move_matches_pointwise(t, g):
    r, f, a, c = g
    shift = zeta_pow(N, a) * c
    moved = [(v.conj() if f else v).rotate(r) + shift for v in vertices(t)]
    assert list(vertices(move(t, g))) == moved


@given(st.integers(1, 6), st.booleans(), isometries())
def test_edge_type_isometry_invariant(k, left_leg, g):
    # mirror image of T_k across its base, or across its left leg (the line at angle k pi/n)
    a = place(N, k)
    b = PlacedTile(N, k, 4 * k if left_leg else 0, True, CycInt.zero(N))
    assert share_segment(a, b)
    t1 = canonical_edge_type(a, b, check=False)
    t2 = canonical_edge_type(move(a, g), move(b, g), check=False)
    assert t1 == t2


def test_full_edge_patch_has_no_misfits():
    a = place(N, 3)
    b = PlacedTile(N, 3, 0, True, CycInt.zero(N))
    p = Patch.from_tiles(N, [a, b])
    assert adjacent_pairs(p) == [(0, 1)]
    assert find_misfit_vertices(p) == []


def test_misfit_detected():
    # T_6 sitting on half of a long base: its far corner lies inside the other base
    big = PlacedTile(N, 1, 0, True, CycInt.zero(N))
    small = place(N, 6)
    p = Patch.from_tiles(N, [big, small])
    assert float(s_value(N, 6)) < float(s_value(N, 1))
    assert [v.embed() for v in find_misfit_vertices(p)] == pytest.approx([s_value(N, 6).embed()])


def test_patch_json_round_trip():
    p = Patch.from_tiles(N, [place(N, 2, 5, True, zeta_pow(N, 3)), place(N, 4)])
    q = Patch.from_json(json.loads(p.dumps()))
    assert q.keys() == p.keys()
    assert abs(p.area() - q.area()) < 1e-12
