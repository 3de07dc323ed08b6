"""Linear programs in standard form: minimize c.x subject to A x = b, x >= 0.

Two self-contained solvers:

``simplex``
    Dense tableau, two-phase. Dantzig pricing, falling back to Bland's
    smallest-index rule after a run of degenerate pivots, which rules out
    cycling. Deterministic; returns a vertex.
``interior_point``
    Mehrotra predictor-corrector on the sparse normal equations. Used for
    the larger flat-norm programs where a dense tableau does not fit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

TOL_LP = 1e-9


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    status: str
    iterations: int
    method: str
    dual: np.ndarray | None = None

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def solve(c, A, b, method: str = "auto", basis=None, tol: float = TOL_LP) -> LPResult:
    """Dispatch to a solver. ``auto`` uses the dense simplex while the
    tableau stays below ~4M entries and the interior-point method beyond."""
    if not sp.issparse(A):
        A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if method == "auto":
        method = "simplex" if m * (n + m) <= 4_000_000 else "ipm"
    if method == "simplex":
        dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        return simplex(c, dense, b, basis=basis, tol=tol)
    if method == "ipm":
        return interior_point(c, A, b, tol=min(tol, 1e-10))
    raise ValueError(f"unknown LP method {method!r}")


# ---------------------------------------------------------------------------
# simplex

def _pivot(T, row, col):
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    nz = np.flatnonzero(np.abs(colv) > 0.0)
    T[nz] -= np.outer(colv[nz], T[row])


def _run_simplex(T, basis, ncols, tol, max_iter, degenerate_switch=50):
    """Optimize the tableau in place. The last row holds reduced costs and
    ``-objective``; only the first ``ncols`` columns may enter."""
    m = T.shape[0] - 1
    it = 0
    bland = False
    streak = 0
    while True:
        red = T[-1, :ncols]
        cand = np.flatnonzero(red < -tol)
        if len(cand) == 0:
            return "optimal", it
        if it >= max_iter:
            return "iteration_limit", it
        col = int(cand[0]) if bland else int(cand[np.argmin(red[cand])])
        colv = T[:m, col]
        rows = np.flatnonzero(colv > tol)
        if len(rows) == 0:
            return "unbounded", it
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(ties[np.argmin(np.asarray(basis)[ties])])
        degenerate = T[row, -1] <= tol
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if degenerate:
            streak += 1
            if streak >= degenerate_switch:
                bland = True
        else:
            streak = 0
            bland = False


def simplex(c, A, b, basis=None, tol: float = TOL_LP, max_iter: int | None = None) -> LPResult:
    """Two-phase dense simplex. ``basis`` may name m columns forming a
    feasible starting basis, which skips phase I."""
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n)
    total_it = 0

    if basis is not None:
        basis = list(map(int, basis))
        B = A[:, basis]
        try:
            xb = np.linalg.solve(B, b)
        except np.linalg.LinAlgError as exc:
            raise LPError("starting basis is singular") from exc
        if np.any(xb < -tol):
            raise LPError("starting basis is not feasible")
        T = np.zeros((m + 1, n + 1))
        T[:m, :n] = np.linalg.solve(B, A)
        T[:m, -1] = xb
    else:
        neg = b < 0
        A[neg] *= -1
        b[neg] *= -1
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = b
        T[-1, :n] = -A.sum(axis=0)
        T[-1, -1] = -b.sum()
        basis = list(range(n, n + m))
        status, it = _run_simplex(T, basis, n + m, tol, max_iter)
        total_it += it
        if -T[-1, -1] > tol * max(1.0, b.sum()) * 10:
            return LPResult(np.zeros(n), np.nan, "infeasible", total_it, "simplex")
        # drive remaining artificials out of the basis
        for row, var in enumerate(basis):
            if var >= n:
                cand = np.flatnonzero(np.abs(T[row, :n]) > 1e-9)
                if len(cand):
                    _pivot(T, row, int(cand[0]))
                    basis[row] = int(cand[0])
        keep = [r for r, var in enumerate(basis) if var < n]
        T = np.vstack([T[keep][:, list(range(n)) + [T.shape[1] - 1]], np.zeros((1, n + 1))])
        basis = [basis[r] for r in keep]
        m = len(basis)

    cb = c[basis]
    T[-1, :n] = c - cb @ T[:m, :n]
    T[-1, -1] = -cb @ T[:m, -1]
    status, it = _run_simplex(T, basis, n, tol, max_iter)
    total_it += it
    x = np.zeros(n)
    x[basis] = T[:m, -1]
    x[np.abs(x) < 1e-14] = 0.0
    x = np.maximum(x, 0.0)
    return LPResult(x, float(c @ x), status, total_it, "simplex")


# ---------------------------------------------------------------------------
# interior point

def interior_point(c, A, b, tol: float = 1e-10, max_iter: int = 200) -> LPResult:
    """Mehrotra predictor-corrector primal-dual method. Divergent iterates on
    unbounded or infeasible problems end as ``numerical_failure``."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _interior_point(c, A, b, tol, max_iter)


def _interior_point(c, A, b, tol, max_iter):
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    A = sp.csr_matrix(A, dtype=float)
    m, n = A.shape
    At = A.T.tocsr()
    reg = 1e-14

    def factor(d):
        M = (A @ sp.diags(d) @ At).tocsc()
        M = M + sp.identity(m, format="csc") * reg * max(1.0, M.diagonal().max())
        return splu(M, permc_spec="MMD_AT_PLUS_A")

    lu = factor(np.ones(n))
    x = At @ lu.solve(b)
    lam = lu.solve(A @ c)
    s = c - At @ lam
    x += max(-1.5 * x.min(), 0.0)
    s += max(-1.5 * s.min(), 0.0)
    nb, nc = 1.0 + np.linalg.norm(b), 1.0 + np.linalg.norm(c)
    xs = x @ s
    if not xs > 1e-12 * nb * nc:
        # the least-squares start sits on the boundary; recentre it
        x += 1.0
        s += 1.0
        xs = x @ s
    x += 0.5 * xs / s.sum()
    s += 0.5 * xs / x.sum()
    status = "iteration_limit"
    it = 0
    for it in range(1, max_iter + 1):
        rb = A @ x - b
        rc = At @ lam + s - c
        mu = x @ s / n
        pobj, dobj = c @ x, b @ lam
        if (np.linalg.norm(rb) / nb < tol and np.linalg.norm(rc) / nc < tol
                and abs(pobj - dobj) / (1.0 + abs(pobj)) < tol):
            status = "optimal"
            break
        d = x / s
        if not np.all(np.isfinite(d)) or np.max(np.abs(x)) > 1e15 * nb:
            status = "numerical_failure"
            break
        try:
            lu = factor(d)
        except RuntimeError:
            status = "numerical_failure"
            break

        def direction(rxs):
            rhs = -rb - A @ (rxs / s) - A @ (d * rc)
            dlam = lu.solve(rhs)
            ds = -rc - At @ dlam
            dx = (rxs - x * ds) / s
            return dx, dlam, ds

        dx_a, dl_a, ds_a = direction(-x * s)
        ap = min(1.0, _max_step(x, dx_a))
        ad = min(1.0, _max_step(s, ds_a))
        mu_aff = (x + ap * dx_a) @ (s + ad * ds_a) / n
        sigma = (mu_aff / mu) ** 3
        dx, dl, ds = direction(-x * s - dx_a * ds_a + sigma * mu)
        eta = max(0.9, 1.0 - mu)
        ap = min(1.0, eta * _max_step(x, dx))
        ad = min(1.0, eta * _max_step(s, ds))
        x = x + ap * dx
        lam = lam + ad * dl
        s = s + ad * ds
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(lam))):
            status = "numerical_failure"
            break
    return LPResult(x, float(c @ x), status, it, "ipm", dual=lam)


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))
