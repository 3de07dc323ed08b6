import math
from itertools import product

import numpy as np
import pytest

from flatgrowth.koch import KochParams, t_level
from flatgrowth.spacetime.currents import (ChainCurrent, bump_forms, current_apply,
                                           current_boundary_identity_check, source_current)
from flatgrowth.spacetime.forms import DT, DX1, DX2, FormField
from flatgrowth.spacetime.mesh import box_mesh, grundmann_moeller, integrate_form, koch_growth_region
from flatgrowth.spacetime.polynomial import T, X1, X2

CLOSED = FormField(2, {"12": 1.0})


def simplex_moment(a):
    """Dirichlet integral of u^a over the unit simplex."""
    return math.prod(math.factorial(k) for k in a) / math.factorial(sum(a) + len(a))


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_quadrature_exact_to_degree_five(dim):
    U, W = grundmann_moeller(dim, 2)
    assert W.sum() == pytest.approx(1 / math.factorial(dim), rel=1e-14)
    for a in product(range(6), repeat=dim):
        if sum(a) > 5:
            continue
        assert np.prod(U ** np.array(a), axis=1) @ W == pytest.approx(simplex_moment(a), rel=1e-12, abs=1e-15)


def test_box_mesh_orientation_and_boundary():
    m = box_mesh(n=2)
    assert np.all(m.volumes > 0) and m.volumes.sum() == pytest.approx(1.0)
    assert len(m.boundary_faces()) == 6 * 2 * 4
    # flux of the closed form x-independent dt^dx1^dx2 potential: integral of dx1^dx2 over the boundary is 0
    assert integrate_form(CLOSED, m.boundary_simplices()) == pytest.approx(0.0, abs=1e-14)


def test_integrate_form_rejects_degree_mismatch():
    with pytest.raises(ValueError):
        integrate_form(DT, box_mesh().simplices)


def test_current_apply_examples():
    T_ = ChainCurrent(box_mesh(n=2), CLOSED)
    assert current_apply(T_, FormField(1, {})) == 0.0
    assert current_apply(T_, DT) == pytest.approx(1.0, rel=1e-14)
    assert current_apply(T_, DX1) == 0.0
    psi1 = FormField(1, {"t": T * X1, "2": X2})
    psi2 = FormField(1, {"t": 1 + X2 * X2})
    a, b = 2.5, -0.75
    lhs = current_apply(T_, a * psi1 + b * psi2)
    assert lhs == pytest.approx(a * current_apply(T_, psi1) + b * current_apply(T_, psi2), abs=1e-10)
    # oracle: integral of t x1 over the cube is 1/4, of 1 + x2^2 is 4/3
    assert lhs == pytest.approx(a / 4 + b * 4 / 3, rel=1e-12)
    with pytest.raises(ValueError):
        ChainCurrent(box_mesh(), DT)


def test_source_current_closed_flux():
    rep = source_current(ChainCurrent(box_mesh(n=2), CLOSED), FormField.scalar(T))
    assert rep.total == pytest.approx(1.0, rel=1e-13)
    assert rep.boundary_part == pytest.approx(1.0, rel=1e-13)
    assert rep.volume_part == 0.0
    assert rep.stokes_error <= max(10 * rep.error_estimate, 1e-12)


def test_source_current_constant_phi():
    rep = source_current(ChainCurrent(box_mesh(n=2), CLOSED), FormField.scalar(3.0))
    assert rep.total == 0.0
    assert rep.boundary_part == pytest.approx(0.0, abs=1e-14)


def test_source_current_with_source():
    F = FormField(2, {"12": T * X1})      # dF = x1 dt^dx1^dx2
    phi = FormField.scalar(1 + T + X2)
    rep = source_current(ChainCurrent(box_mesh(n=2), F), phi)
    # the interior part is minus the integral of x1 phi over the cube: -(1/2)(1 + 1/2 + 1/2)
    assert rep.volume_part == pytest.approx(-1.0, rel=1e-13)
    assert rep.stokes_error <= max(10 * rep.error_estimate, 1e-12)


def test_source_current_non_polynomial_flux():
    F = FormField(2, {"12": lambda t, x1, x2: np.exp(t) * np.cos(x1), "t1": lambda t, x1, x2: np.sin(x2 * t)})
    rep = source_current(ChainCurrent(box_mesh(n=3), F), FormField.scalar(T * X1), order=3)
    assert rep.stokes_error <= max(10 * rep.error_estimate, 1e-12)


@pytest.mark.parametrize("t_end", [0.5, 0.8, t_level(3)])
def test_stokes_on_growing_snowflake(t_end):
    mesh = koch_growth_region(KochParams(), t_end, substeps=3)
    assert np.all(mesh.volumes >= -1e-15)
    rep = source_current(ChainCurrent(mesh, CLOSED), FormField.scalar(T))
    assert rep.volume_part == 0.0
    assert rep.stokes_error <= max(10 * rep.error_estimate, 1e-12)
    # dT(t) is the spacetime volume swept, the integral of area(C(t)) dt
    assert rep.total == pytest.approx(mesh.volumes.sum(), rel=1e-12)


def test_koch_region_volume_matches_area_integral():
    from scipy.integrate import quad

    from flatgrowth.chains import mass
    from flatgrowth.koch import filled_chain
    P = KochParams()
    # independent route: integrate area(C(t)) over time, breaking at the stage times
    exact, _ = quad(lambda t: mass(filled_chain(P, max(t, 1e-12))), 0, 0.75, points=[0.5], epsabs=1e-13)
    vols = [koch_growth_region(P, 0.75, n).volumes.sum() for n in (1, 2, 4)]
    # each layer overfills by a fixed share of its active volume, so the excess halves with the layer count
    assert all(v > exact for v in vols)
    assert (vols[0] - exact) / (vols[1] - exact) == pytest.approx(2.0, rel=1e-6)
    assert 2 * vols[2] - vols[1] == pytest.approx(exact, rel=1e-9)
    with pytest.raises(ValueError):
        koch_growth_region(P, 0.5, substeps=0)


def test_bump_identity():
    for phi in bump_forms():
        rep = current_boundary_identity_check(phi, box_mesh(n=2))
        assert rep.max_discrepancy < 1e-6
        assert np.max(np.abs(rep.lhs)) > 1e-6   # the battery is not trivially zero


def test_identity_trivial_and_linear():
    phi = bump_forms()[1]
    zero = [FormField(1, {})]
    rep = current_boundary_identity_check(phi, box_mesh(), omegas=zero)
    assert rep.lhs.tolist() == [0.0] and rep.rhs.tolist() == [0.0]
    om = FormField(1, {"t": X1 * X2, "1": T})
    r1 = current_boundary_identity_check(phi, box_mesh(), omegas=[om])
    r10 = current_boundary_identity_check(phi, box_mesh(), omegas=[10 * om])
    assert r10.lhs[0] == pytest.approx(10 * r1.lhs[0], rel=1e-12)
    assert r10.rhs[0] == pytest.approx(10 * r1.rhs[0], rel=1e-12)
