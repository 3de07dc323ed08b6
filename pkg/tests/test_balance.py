import numpy as np
import pytest

from flatgrowth.spacetime.balance import (FrameError, FrameMap, balance_residual, convergence_orders,
                                          density_and_flux, frame_transform, manufactured_solution, reconstruct)
from flatgrowth.spacetime.forms import DT, FormField
from flatgrowth.spacetime.polynomial import T, X1, X2


@pytest.fixture
def samples(rng):
    return rng.uniform(-1, 1, (100, 3))


def test_density_and_flux_examples(samples):
    rho, J = density_and_flux(FormField(2, {"12": 1.0}))
    assert rho.evaluate(samples)[:, 2].tolist() == [1.0] * 100
    assert np.all(J.evaluate(samples) == 0)
    f = 1 + T * X2
    rho, J = density_and_flux(FormField(2, {"12": 1.0, "t2": -f}))
    # hand derivation: -(d/dt into -dt^f dx2) = f dx2
    assert np.array_equal(J.evaluate(samples)[:, 2], f(*samples.T))
    assert np.all(J.evaluate(samples)[:, :2] == 0)
    with pytest.raises(ValueError):
        density_and_flux(DT)


def test_reconstruction_identity(samples):
    F = FormField(2, {"12": 1 + X1 * X2, "t1": T * X1, "t2": -X2})
    rho, J = density_and_flux(F)
    assert np.array_equal(reconstruct(rho, J).evaluate(samples), F.evaluate(samples))


def test_balance_examples(samples):
    zero3 = FormField(3, {})
    rho, J = density_and_flux(FormField(2, {"12": 1.0}))
    assert balance_residual(rho, J, zero3, 1e-3, samples).max_abs == 0.0
    rho = FormField(2, {"12": T * X1})
    r = balance_residual(rho, FormField(1, {}), FormField(3, {"t12": X1}), 1e-3, samples)
    assert r.max_abs < 1e-12   # the stencil is exact on polynomials of degree <= 2 in t


def test_manufactured_convergence(rng):
    F, s = manufactured_solution()
    rho, J = density_and_flux(F)
    pts = rng.uniform(-1, 1, (200, 3))
    res, orders = convergence_orders(rho, J, s, pts, h0=0.1, halvings=4)
    assert np.all(res[:-1] / res[1:] >= 3.5)
    assert np.all(orders >= 1.8)


def test_identity_frame_is_exact(samples):
    F, s = manufactured_solution()
    rep = frame_transform(F, FrameMap.identity(), samples, s)
    _, J = density_and_flux(F)
    assert np.array_equal(rep.J_formula, J.evaluate(samples)[:, 1:])
    assert rep.flux_discrepancy < 1e-8


def test_galilean_boost_paths_agree(samples):
    v = np.array([0.7, -0.3])
    F = FormField(2, {"12": 1.0})
    rep = frame_transform(F, FrameMap.galilean(v), samples)
    assert rep.flux_discrepancy < 1e-8
    # hand oracle: w = dx/dt' = -v and J' = -(w1 d_1 + w2 d_2) into dx1^dx2 = w2 dx1 - w1 dx2
    w = -v
    assert np.allclose(rep.J_formula, np.tile([w[1], -w[0]], (len(samples), 1)), rtol=0, atol=1e-15)


def test_boost_with_source(samples):
    F, s = manufactured_solution()
    rep = frame_transform(F, FrameMap.affine([[1.0, 0.2], [0.0, 1.5]], [0.4, -0.1], (0.3, 0.0)), samples, s)
    assert rep.flux_discrepancy < 1e-8
    assert rep.source_discrepancy < 1e-8


def test_dt_is_frame_independent(samples):
    # contracting dt with the pushed-forward time vector still gives 1
    frame = FrameMap.galilean([1.3, 0.4])
    w = frame.velocity(samples[:, 0], samples[:, 1:])
    for n in range(5):
        V = (1.0, *w[n])
        assert DT.interior(V).evaluate(samples[n:n + 1])[0, 0] == 1.0


def test_non_invertible_frame_rejected(samples):
    with pytest.raises(FrameError):
        FrameMap.affine([[1.0, 2.0], [0.5, 1.0]], [0, 0])
    squash = FrameMap(lambda t, x: x ** 2, lambda t, x: np.sqrt(np.abs(x)))
    with pytest.raises(FrameError):
        frame_transform(FormField(2, {"12": 1.0}), squash, samples)
