import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatgrowth.chains import (ChainError, DimensionMismatch, PolyhedralChain, Simplex, boundary, chain_from_json,
                               chain_to_json, chains_equal, combine, mass, subdivide)

SQ3 = math.sqrt(3.0)


def tri(d=1.0, coeff=1.0):
    return PolyhedralChain.simplex([(0, 0), (d, 0), (d / 2, SQ3 / 2 * d)], coeff)


def seg(a, b, coeff=1.0):
    return PolyhedralChain.simplex([a, b], coeff)


def pt(p, coeff=1.0):
    return PolyhedralChain.simplex([p], coeff)


# strategies: integer-lattice coordinates keep overlaps exact and frequent
coord = st.integers(-4, 4).map(float)
point = st.tuples(coord, coord)
coeff = st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 3.0])


def _area2(p):
    return (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0])


triangles = st.lists(point, min_size=3, max_size=3).filter(lambda p: _area2(p) != 0)


@st.composite
def chains2(draw, max_terms=4):
    tris = draw(st.lists(triangles, min_size=1, max_size=max_terms))
    cs = draw(st.lists(coeff, min_size=len(tris), max_size=len(tris)))
    return PolyhedralChain(2, cs, np.array(tris, float))


@st.composite
def chains1(draw, max_terms=5):
    segs = draw(st.lists(st.tuples(point, point).filter(lambda s: s[0] != s[1]), min_size=1, max_size=max_terms))
    cs = draw(st.lists(coeff, min_size=len(segs), max_size=len(segs)))
    return PolyhedralChain(1, cs, np.array(segs, float))


# --- simplices ------------------------------------------------------------

def test_simplex_validation():
    with pytest.raises(ChainError):
        Simplex(((0, 0), (0, 0)))
    with pytest.raises(ChainError):
        Simplex(((0, 0), (1, 1), (2, 2)))
    with pytest.raises(ChainError):
        Simplex(((0, 0), (float("nan"), 1)))
    with pytest.raises(ChainError):
        Simplex(((0, 0), (1, 0), (0, 1), (1, 1)))


def test_transposition_flips_sign():
    a = PolyhedralChain.simplex([(0, 0), (1, 0), (0, 1)])
    b = PolyhedralChain.simplex([(1, 0), (0, 0), (0, 1)])
    assert chains_equal(a, -b)
    assert chains_equal(seg((0, 0), (1, 0)), -seg((1, 0), (0, 0)))


# --- mass -----------------------------------------------------------------

def test_mass_examples():
    assert mass(seg((0, 0), (1, 0))) == pytest.approx(1.0, abs=1e-15)
    assert mass(tri(1.0)) == pytest.approx(SQ3 / 4, rel=1e-14)
    assert mass(tri(2.0)) == pytest.approx(SQ3, rel=1e-14)
    assert mass(tri(1.0, 2.0)) == pytest.approx(2 * SQ3 / 4, rel=1e-14)
    assert mass(PolyhedralChain.empty(1)) == 0.0
    assert mass(pt((0.3, 0.2), -2.5)) == 2.5


def test_mass_of_overlapping_terms_uses_canonical_form():
    # the same triangle twice with opposite signs has mass zero
    c = tri() + tri(coeff=-1.0)
    assert mass(c) == 0.0
    # collinear overlapping segments merge before measuring
    c = seg((0, 0), (2, 0)) + seg((1, 0), (3, 0))
    assert mass(c) == pytest.approx(1 + 2 * 1 + 1)


# --- boundary ---------------------------------------------------------------

def test_boundary_examples():
    p0, p1, p2 = (0.0, 0.0), (1.0, 0.0), (0.2, 0.9)
    assert chains_equal(boundary(seg(p0, p1)), pt(p1) - pt(p0))
    T = PolyhedralChain.simplex([p0, p1, p2])
    expect = seg(p1, p2) - seg(p0, p2) + seg(p0, p1)
    assert chains_equal(boundary(T), expect)
    assert boundary(boundary(T)).is_empty
    with pytest.raises(ChainError):
        boundary(pt(p0))


def test_shared_faces_cancel():
    sq = PolyhedralChain(2, [1.0, 1.0], [[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]])
    b = boundary(sq)
    assert len(b.canonical()) == 4
    assert mass(b) == pytest.approx(4.0)


@given(chains2())
def test_boundary_of_boundary_is_empty(c):
    assert boundary(boundary(c)).canonical().is_empty


@given(chains1())
def test_boundary_of_1chain_has_zero_total_weight(c):
    b = boundary(c)
    assert abs(float(np.sum(b.canonical().coeffs))) < 1e-12


# --- combine --------------------------------------------------------------

def test_combine_examples():
    s = seg((0, 0), (1, 0))
    assert combine(1, s, -1, s).is_empty
    assert combine(1, s, 1, seg((1, 0), (0, 0))).is_empty
    c = combine(1, s, -1, seg((1 / 3, 0), (2 / 3, 0)))
    assert len(c) == 2
    assert mass(c) == pytest.approx(2 / 3, rel=1e-14)
    assert chains_equal(c, seg((0, 0), (1 / 3, 0)) + seg((2 / 3, 0), (1, 0)))
    with pytest.raises(DimensionMismatch):
        combine(1, s, 1, tri())


def test_overlapping_triangles_overlay():
    a = PolyhedralChain.simplex([(0, 0), (2, 0), (0, 2)])
    b = PolyhedralChain.simplex([(0, 0), (1, 0), (0, 1)])
    d = combine(1, a, -1, b)
    assert mass(d) == pytest.approx(2.0 - 0.5, rel=1e-12)
    assert chains_equal(boundary(d), boundary(a) - boundary(b))


@given(chains1(), chains1(), coeff, coeff)
def test_mass_triangle_inequality_1(A, B, a, b):
    assert mass(combine(a, A, b, B)) <= abs(a) * mass(A) + abs(b) * mass(B) + 1e-9


@given(chains2(3), chains2(3), coeff, coeff)
def test_mass_triangle_inequality_2(A, B, a, b):
    assert mass(combine(a, A, b, B)) <= abs(a) * mass(A) + abs(b) * mass(B) + 1e-9


@given(chains2(3))
def test_orientation_reversal(c):
    assert mass(-c) == pytest.approx(mass(c), rel=1e-12)
    assert chains_equal(boundary(-c), -boundary(c))


# --- subdivision ---------------------------------------------------------------

def test_subdivision_examples():
    s = seg((0, 0), (1, 0))
    half = subdivide(s)
    assert len(half) == 2 and mass(half) == pytest.approx(1.0)
    T = tri()
    four = subdivide(T)
    assert len(four) == 4
    assert np.allclose(four.volumes(), SQ3 / 16)
    assert mass(four) == pytest.approx(mass(T), rel=1e-12)
    assert chains_equal(boundary(four), boundary(T))
    assert chains_equal(four, T)


@given(st.one_of(chains1(), chains2(3)), st.integers(1, 4))
def test_subdivision_invariance(c, n):
    s = subdivide(c, n)
    assert mass(s) == pytest.approx(mass(c), rel=1e-12, abs=1e-12)
    assert chains_equal(s, c)
    assert chains_equal(boundary(s), boundary(c))


# --- JSON -------------------------------------------------------------------------

def test_json_format():
    d = chain_to_json(seg((0, 0), (1, 0)) + seg((1, 0), (1, 1)))
    assert d["dimension"] == 1
    assert len(d["vertices"]) == 3
    assert all(set(s) == {"coeff", "verts"} for s in d["simplices"])
    assert chain_to_json(PolyhedralChain.empty(2)) == {"dimension": 2, "vertices": [], "simplices": []}


@given(st.one_of(chains1(), chains2(3)))
def test_json_round_trip(c):
    back = chain_from_json(chain_to_json(c))
    assert chains_equal(back, c)
    assert chain_to_json(back) == chain_to_json(c)


def test_json_rejects_bad_indices():
    with pytest.raises(ChainError):
        chain_from_json({"dimension": 1, "vertices": [[0, 0]], "simplices": [{"coeff": 1, "verts": [0, 1]}]})
    with pytest.raises(ChainError):
        chain_from_json({"dimension": 1, "vertices": [[0, 0], [1, 0]], "simplices": [{"coeff": 1, "verts": [0]}]})


def test_vertex_tolerance_equality():
    a = seg((0, 0), (1, 0))
    b = seg((0, 0), (1 + 1e-11, 0))
    assert chains_equal(a, b)
    assert not chains_equal(a, seg((0, 0), (1 + 1e-6, 0)))
