import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from flatgrowth.lp import interior_point, simplex, solve


def highs(c, A, b):
    r = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert r.status == 0
    return r.fun


@st.composite
def feasible_lps(draw):
    m = draw(st.integers(1, 6))
    n = draw(st.integers(m, 10))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 2, n) * (rng.uniform(size=n) < 0.6)  # degenerate starts are common
    b = A @ x0
    c = rng.uniform(0.1, 3.0, n)                              # positive costs: bounded below
    return c, A, b


@given(feasible_lps())
def test_simplex_matches_highs(lp):
    c, A, b = lp
    r = simplex(c, A, b)
    assert r.success
    assert r.fun == pytest.approx(highs(c, A, b), rel=1e-8, abs=1e-9)
    assert np.all(r.x >= -1e-12)
    assert np.allclose(A @ r.x, b, atol=1e-8)


@given(feasible_lps())
def test_interior_point_matches_highs(lp):
    c, A, b = lp
    r = interior_point(c, sp.csr_matrix(A), b)
    assert r.success
    assert r.fun == pytest.approx(highs(c, A, b), rel=1e-7, abs=1e-8)


def test_beale_cycling_example_terminates():
    # classic example on which Dantzig's rule with lowest-index ties cycles
    c = [0, 0, 0, -0.75, 20, -0.5, 6]
    A = [[1, 0, 0, 0.25, -8, -1, 9], [0, 1, 0, 0.5, -12, -0.5, 3], [0, 0, 1, 0, 0, 1, 0]]
    r = solve(c, A, [0, 0, 1.0], method="simplex", basis=[0, 1, 2])
    assert r.success
    assert r.fun == pytest.approx(-1.25, abs=1e-12)


def test_infeasible_and_unbounded():
    assert solve([1.0, 1.0], [[1.0, 1.0]], [-1.0], method="simplex").status == "infeasible"
    assert solve([-1.0, 0.0], [[1.0, -1.0]], [0.0], method="simplex").status == "unbounded"
    assert not interior_point([-1.0, 0.0], [[1.0, -1.0]], [0.0]).success


def test_auto_dispatch_and_deterministic():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(5, 9))
    b = A @ rng.uniform(0, 1, 9)
    c = rng.uniform(1, 2, 9)
    r1 = solve(c, A, b)
    r2 = solve(c, A, b)
    assert r1.method == "simplex"
    assert np.array_equal(r1.x, r2.x)
    with pytest.raises(ValueError):
        solve(c, A, b, method="magic")
