import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from flatgrowth.chains import PolyhedralChain, boundary, chains_equal, mass
from flatgrowth.flatnorm import (KOCH_STEP_AREA, CarrierError, boundary_mass_bound_check, build_complex,
                                 flat_distance, flat_norm, koch_tail_bound)
from flatgrowth.koch import KochParams, koch_stage

SQ3 = math.sqrt(3.0)
TRI = PolyhedralChain.simplex([(0, 0), (1, 0), (0.5, SQ3 / 2)])

coord = st.integers(0, 3).map(float)
point = st.tuples(coord, coord)


@st.composite
def small_chains(draw):
    segs = draw(st.lists(st.tuples(point, point).filter(lambda s: s[0] != s[1]), min_size=1, max_size=3))
    cs = draw(st.lists(st.sampled_from([-1.0, 1.0, 2.0]), min_size=len(segs), max_size=len(segs)))
    return PolyhedralChain(1, cs, np.array(segs))


def highs_flat_norm(B, K):
    """Independent oracle: the same LP assembled here and solved by HiGHS."""
    b = K.edge_vector(B)
    E, T = K.incidence.shape
    I = sp.identity(E)
    A = sp.hstack([I, -I, K.incidence, -K.incidence]).tocsc()
    c = np.concatenate([K.edge_lengths, K.edge_lengths, K.triangle_areas, K.triangle_areas])
    r = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert r.status == 0
    return r.fun


def test_empty_chain():
    K = build_complex([TRI.boundary()])
    assert flat_norm(PolyhedralChain.empty(1), K).value == 0.0


@pytest.mark.parametrize("refine", [0, 1, 2])
@pytest.mark.parametrize("method", ["simplex", "ipm"])
def test_triangle_example(refine, method):
    B = TRI.boundary()
    K = build_complex([B], refine=refine)
    res = flat_norm(B, K, method=method)
    assert res.value <= SQ3 / 4 + 1e-9
    assert res.value == pytest.approx(min(3.0, SQ3 / 4), rel=0.02)
    # value is mass(residual) + mass(filling), and residual = B - dD
    assert res.value == pytest.approx(mass(res.residual) + mass(res.filling), abs=1e-9)
    assert chains_equal(res.residual, B - boundary(res.filling))


def test_large_triangle_prefers_filling_small_prefers_boundary():
    # for d > 12/sqrt3 the filling costs more than the boundary mass 3d
    for d, expect in [(0.5, SQ3 / 16), (10.0, min(30.0, SQ3 / 4 * 100))]:
        B = PolyhedralChain.simplex([(0, 0), (d, 0), (d / 2, SQ3 / 2 * d)]).boundary()
        assert flat_norm(B, build_complex([B])).value == pytest.approx(expect, rel=1e-9)


def test_shifted_segment():
    for h in [0.2, 0.05, 0.01]:
        a = PolyhedralChain.simplex([(0, 0), (1, 0)])
        b = PolyhedralChain.simplex([(0, h), (1, h)])
        K = build_complex([a, b], bbox=(-0.5, -0.5, 1.5, 0.5 + h))
        d = flat_distance(a, b, K)
        # swept rectangle: area h plus the two end segments 2h
        assert d <= h + 2 * h + 1e-9
        assert d == pytest.approx(3 * h, rel=1e-9)


def test_flat_distance_zero_and_symmetric():
    a = PolyhedralChain.simplex([(0, 0), (1, 0)])
    b = PolyhedralChain.simplex([(0, 0.3), (1, 0.1)])
    K = build_complex([a, b])
    assert flat_distance(a, a, K) == 0.0
    assert flat_distance(a, b, K) == pytest.approx(flat_distance(b, a, K), abs=1e-9)


def test_carrier_error():
    K = build_complex([TRI.boundary()])
    stray = PolyhedralChain.simplex([(0.1, 0.1), (0.3, 0.15)])
    with pytest.raises(CarrierError):
        flat_norm(stray, K)


def test_boundary_mass_bound_examples():
    K = build_complex([TRI.boundary()])
    rep = boundary_mass_bound_check(TRI, K)
    assert rep.holds and rep.flat_norm == pytest.approx(SQ3 / 4, rel=1e-9) and rep.mass == pytest.approx(SQ3 / 4)
    rep = boundary_mass_bound_check(PolyhedralChain.empty(2), K)
    assert rep.holds and rep.flat_norm == 0.0 and rep.mass == 0.0
    squares = []
    for x0 in (0.0, 2.0):
        squares += [[(x0, 0), (x0 + 1, 0), (x0 + 1, 1)], [(x0, 0), (x0 + 1, 1), (x0, 1)]]
    A = PolyhedralChain(2, np.ones(4), squares)
    rep = boundary_mass_bound_check(A, build_complex([A.boundary()]))
    assert rep.mass == pytest.approx(2.0)
    assert rep.holds and rep.flat_norm <= 2.0 + 1e-9


def test_koch_tail_bound_values():
    assert koch_tail_bound(0, 1) == pytest.approx(KOCH_STEP_AREA * 4 / 9, rel=1e-15)
    assert koch_tail_bound(0, 1) == pytest.approx(0.14434, abs=1e-5)
    assert koch_tail_bound(0, math.inf) == pytest.approx(3 * SQ3 / 20, rel=1e-14)
    assert koch_tail_bound(3, 4) == pytest.approx(3 * SQ3 / 16 * (4 / 9) ** 4, rel=1e-14)
    assert koch_tail_bound(3, 4) == pytest.approx(0.0126717, abs=1e-7)
    assert koch_tail_bound(1, 3) == pytest.approx(koch_tail_bound(1, 2) + koch_tail_bound(2, 3), rel=1e-14)
    with pytest.raises(ValueError):
        koch_tail_bound(2, 2)


def test_koch_first_step_within_bound():
    p = KochParams()
    B1, B0 = koch_stage(p, 1), koch_stage(p, 0)
    K = build_complex([B0, B1])
    assert flat_distance(B1, B0, K) <= koch_tail_bound(0, 1) + 1e-9


# --- properties ----------------------------------------------------------------------------

@settings(max_examples=25)
@given(small_chains())
def test_flat_norm_le_mass_and_matches_highs(B):
    K = build_complex([B])
    res = flat_norm(B, K)
    assert res.value <= mass(B) + 1e-9
    assert res.value == pytest.approx(highs_flat_norm(B, K), rel=1e-8, abs=1e-9)


@settings(max_examples=20)
@given(small_chains(), st.sampled_from([-3.0, -0.5, 0.25, 2.0]))
def test_homogeneity(B, a):
    K = build_complex([B])
    assert flat_norm(a * B, K).value == pytest.approx(abs(a) * flat_norm(B, K).value, rel=1e-8, abs=1e-9)


@settings(max_examples=20)
@given(small_chains(), small_chains(), small_chains())
def test_triangle_inequality(A, B, C):
    K = build_complex([A, B, C], bbox=(-1, -1, 4, 4))
    ab, bc, ac = flat_distance(A, B, K), flat_distance(B, C, K), flat_distance(A, C, K)
    assert ac <= ab + bc + 1e-8


@settings(max_examples=15)
@given(small_chains())
def test_refinement_never_increases(B):
    K = build_complex([B])
    v0 = flat_norm(B, K).value
    v1 = flat_norm(B, K.refine(1)).value
    assert v1 <= v0 + 1e-9


def test_complex_is_conforming():
    K = build_complex([TRI.boundary()], refine=1)
    # every interior edge is shared by exactly two triangles with opposite orientation
    inc = K.incidence.tocsr() if sp.issparse(K.incidence) else sp.csr_matrix(K.incidence)
    per_edge = np.asarray(abs(inc).sum(axis=1)).ravel()
    assert set(np.unique(per_edge)) <= {1.0, 2.0}
    signed = np.asarray(inc.sum(axis=1)).ravel()
    assert np.all(np.abs(signed[per_edge == 2]) == 0)
    assert K.triangle_areas.sum() == pytest.approx(np.prod(np.ptp(K.vertices, axis=0)), rel=1e-12)


def test_interior_point_matches_simplex_on_koch_stages():
    p = KochParams()
    B = koch_stage(p, 3) - koch_stage(p, 1)
    K = build_complex(B)
    ipm, spx = flat_norm(B, K, method="ipm"), flat_norm(B, K, method="simplex")
    # the integral rounding of the filling recovers the exact vertex
    assert ipm.value == pytest.approx(spx.value, rel=1e-13)
    assert ipm.value <= koch_tail_bound(1, 3) * (1 + 1e-12)
