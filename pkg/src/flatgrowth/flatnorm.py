"""Simplicial flat norm of polyhedral 1-chains.

The flat norm ``inf_D mass(B - dD) + mass(D)`` is computed exactly on a
triangulated ambient complex K as the linear program

    minimize   sum_e len_e (q+_e + q-_e) + sum_t area_t (p+_t + p-_t)
    subject to q+ - q- + M p+ - M p- = b,   q, p >= 0

where ``b`` holds the edge coefficients of B and M is the signed
edge-triangle incidence matrix. Every 2-chain on K is a candidate filling,
so the optimum is an upper bound for the continuum flat norm, and refining
K can only lower it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import shapely
import triangle as tr
from scipy.spatial import cKDTree

from flatgrowth.chains import EPS_GEOM, ChainError, PolyhedralChain, _cluster_points
from flatgrowth.lp import TOL_LP, LPError, solve

KOCH_STEP_AREA = 3.0 * math.sqrt(3.0) / 16.0


class CarrierError(ChainError):
    """A chain is not carried by edges of the ambient complex."""


@dataclass
class AmbientComplex:
    """Conforming triangulation with oriented edges ``i < j`` and CCW triangles."""

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray = field(init=False)
    incidence: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        P = self.vertices[tris]
        area2 = ((P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
                 - (P[:, 1, 1] - P[:, 0, 1]) * (P[:, 2, 0] - P[:, 0, 0]))
        cw = area2 < 0
        tris[cw] = tris[cw][:, [0, 2, 1]]
        self.triangles = tris
        # directed edges a->b, b->c, c->a of every triangle
        directed = np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1).reshape(-1, 2)
        lo = directed.min(axis=1)
        hi = directed.max(axis=1)
        sign = np.where(directed[:, 0] == lo, 1.0, -1.0)
        keys = lo * len(self.vertices) + hi
        ukeys, inv = np.unique(keys, return_inverse=True)
        self.edges = np.stack([ukeys // len(self.vertices), ukeys % len(self.vertices)], axis=1)
        tri_idx = np.repeat(np.arange(len(tris)), 3)
        self.incidence = sp.csr_matrix((sign, (inv, tri_idx)), shape=(len(ukeys), len(tris)))
        self._keys = ukeys
        self._tree = None

    @property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def triangle_areas(self) -> np.ndarray:
        P = self.vertices[self.triangles]
        return 0.5 * ((P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
                      - (P[:, 1, 1] - P[:, 0, 1]) * (P[:, 2, 0] - P[:, 0, 0]))

    def edge_ids(self, i, j):
        """Edge index and orientation sign for vertex pairs (-1 if absent)."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        keys = lo * len(self.vertices) + hi
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1)
        found = self._keys[pos] == keys
        return np.where(found, pos, -1), np.where(i == lo, 1.0, -1.0)

    def edge_vector(self, chain: PolyhedralChain) -> np.ndarray:
        """Coefficients of a 1-chain on the oriented edges of the complex."""
        if chain.dimension != 1:
            raise ChainError("only 1-chains live on complex edges")
        c = chain.canonical()
        b = np.zeros(len(self.edges))
        if c.is_empty:
            return b
        if self._tree is None:
            self._tree = cKDTree(self.vertices)
        for coeff, (p, q) in zip(c.coeffs, c.verts):
            d = q - p
            L = math.hypot(*d)
            cand = np.asarray(self._tree.query_ball_point((p + q) / 2, L / 2 + 2 * EPS_GEOM), dtype=np.int64)
            rel = self.vertices[cand] - p
            s = rel @ d / L
            off = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / L
            on = (off <= 2 * EPS_GEOM) & (s >= -2 * EPS_GEOM) & (s <= L + 2 * EPS_GEOM)
            idx = cand[on][np.argsort(s[on])]
            if len(idx) < 2 or np.hypot(*(self.vertices[idx[0]] - p)) > 2 * EPS_GEOM \
                    or np.hypot(*(self.vertices[idx[-1]] - q)) > 2 * EPS_GEOM:
                raise CarrierError(f"segment {p.tolist()} -> {q.tolist()} has no complex vertex at an endpoint")
            eid, sgn = self.edge_ids(idx[:-1], idx[1:])
            if np.any(eid < 0):
                raise CarrierError(f"segment {p.tolist()} -> {q.tolist()} is not a union of complex edges")
            np.add.at(b, eid, coeff * sgn)
        return b

    def edge_chain(self, coeffs: np.ndarray, tol: float = 0.0) -> PolyhedralChain:
        keep = np.abs(coeffs) > tol
        verts = self.vertices[self.edges[keep]]
        return PolyhedralChain(1, coeffs[keep], verts)

    def triangle_chain(self, coeffs: np.ndarray, tol: float = 0.0) -> PolyhedralChain:
        keep = np.abs(coeffs) > tol
        return PolyhedralChain(2, coeffs[keep], self.vertices[self.triangles[keep]], canonical=True)

    def refine(self, levels: int = 1) -> "AmbientComplex":
        """Uniform refinement: every triangle splits into four through edge midpoints."""
        K = self
        for _ in range(levels):
            nv = len(K.vertices)
            mids = 0.5 * (K.vertices[K.edges[:, 0]] + K.vertices[K.edges[:, 1]])
            verts = np.vstack([K.vertices, mids])
            a, b, c = K.triangles.T
            ab = K.edge_ids(a, b)[0] + nv
            bc = K.edge_ids(b, c)[0] + nv
            ca = K.edge_ids(c, a)[0] + nv
            tris = np.concatenate([np.stack([a, ab, ca], 1), np.stack([ab, b, bc], 1),
                                   np.stack([ca, bc, c], 1), np.stack([ab, bc, ca], 1)])
            K = AmbientComplex(verts, tris)
        return K


def _node_segments(chains) -> tuple[np.ndarray, np.ndarray]:
    """Vertices and index segments of the union of the chains' supports, split
    at every intersection and T-junction."""
    segs = [c.canonical().verts for c in chains if c.dimension == 1 and not c.is_empty]
    if not segs:
        return np.zeros((0, 2)), np.zeros((0, 2), dtype=np.int64)
    allseg = np.concatenate(segs)
    lines = shapely.linestrings(allseg)
    noded = shapely.node(shapely.multilinestrings(lines))
    parts = shapely.get_parts(noded)
    coords = np.asarray([shapely.get_coordinates(g)[[0, -1]] for g in parts])
    pts = coords.reshape(-1, 2)
    labels = _cluster_points(pts)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    seg_idx = inv.reshape(-1, 2)
    seg_idx = seg_idx[seg_idx[:, 0] != seg_idx[:, 1]]
    seg_idx = np.unique(np.sort(seg_idx, axis=1), axis=0)
    return pts[first], seg_idx


def build_complex(chains, bbox=None, refine: int = 0, margin: float = 0.25,
                  max_area: float | None = None) -> AmbientComplex:
    """Constrained triangulation of a box containing the chains, with every
    chain segment a union of edges, then ``refine`` uniform refinements."""
    if isinstance(chains, PolyhedralChain):
        chains = [chains]
    chains = list(chains)
    pts, segs = _node_segments(chains)
    if bbox is None:
        boxes = np.array([c.bbox() for c in chains if not c.is_empty] or [(0.0, 0.0, 1.0, 1.0)])
        lo = boxes[:, :2].min(axis=0)
        hi = boxes[:, 2:].max(axis=0)
        pad = margin * max(float(np.max(hi - lo)), 1e-6)
        bbox = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
    x0, y0, x1, y1 = map(float, bbox)
    if len(pts) and (pts[:, 0].min() < x0 - EPS_GEOM or pts[:, 0].max() > x1 + EPS_GEOM
                     or pts[:, 1].min() < y0 - EPS_GEOM or pts[:, 1].max() > y1 + EPS_GEOM):
        raise ChainError("chains extend outside the bounding box")
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    nc = len(pts)
    verts = np.vstack([pts, corners])
    box_segs = np.array([[nc, nc + 1], [nc + 1, nc + 2], [nc + 2, nc + 3], [nc + 3, nc]])
    data = {"vertices": verts, "segments": np.vstack([segs, box_segs]) if len(segs) else box_segs}
    opts = "pQ"
    if max_area is not None:
        opts += f"a{max_area:.17g}"
    out = tr.triangulate(data, opts)
    K = AmbientComplex(out["vertices"], out["triangles"])
    for c in chains:
        K.edge_vector(c)  # raises CarrierError if the triangulation lost a segment
    return K.refine(refine) if refine else K


@dataclass
class FlatNormResult:
    value: float
    filling: PolyhedralChain
    residual: PolyhedralChain
    lp_status: str = "optimal"
    lp_method: str = ""
    lp_objective: float = float("nan")
    iterations: int = 0

    def to_json(self) -> dict:
        from flatgrowth.chains import chain_to_json
        return {"value": self.value, "filling": chain_to_json(self.filling),
                "residual": chain_to_json(self.residual)}


def flat_norm(B: PolyhedralChain, K: AmbientComplex, method: str = "auto",
              tol: float = TOL_LP) -> FlatNormResult:
    """Simplicial flat norm of a 1-chain carried by K."""
    b = K.edge_vector(B)
    E, T = K.incidence.shape
    if not np.any(b):
        return FlatNormResult(0.0, PolyhedralChain.empty(2), PolyhedralChain.empty(1),
                              lp_method="trivial", lp_objective=0.0)
    L = K.edge_lengths
    Ar = K.triangle_areas
    Ie = sp.identity(E, format="csr")
    A = sp.hstack([Ie, -Ie, K.incidence, -K.incidence], format="csr")
    c = np.concatenate([L, L, Ar, Ar])
    basis = np.where(b >= 0, np.arange(E), E + np.arange(E))
    res = solve(c, A, b, method=method, basis=basis, tol=tol)
    if not res.success:
        raise LPError(f"flat-norm LP ended with status {res.status!r}; D = 0 is feasible so this is a solver bug")
    D = res.x[2 * E:2 * E + T] - res.x[2 * E + T:]
    D[np.abs(D) < 1e-9] = 0.0
    q, value = _objective(K, b, D)
    if np.array_equal(b, np.round(b)):
        # a planar triangulation has a totally unimodular boundary matrix, so an
        # integral optimum exists; every D is feasible, so keeping the smaller
        # objective of D and its rounding can only improve an interior-point answer
        D_int = np.round(D)
        q_int, value_int = _objective(K, b, D_int)
        if value_int <= value:
            D, q, value = D_int, q_int, value_int
    return FlatNormResult(value, K.triangle_chain(D), K.edge_chain(q), res.status, res.method,
                          res.fun, res.iterations)


def _objective(K: AmbientComplex, b: np.ndarray, D: np.ndarray) -> tuple[np.ndarray, float]:
    q = b - K.incidence @ D
    q[np.abs(q) < 1e-12] = 0.0
    return q, float(np.abs(q) @ K.edge_lengths + np.abs(D) @ K.triangle_areas)


def flat_distance(B1: PolyhedralChain, B2: PolyhedralChain, K: AmbientComplex,
                  method: str = "auto") -> float:
    return flat_norm(B1 - B2, K, method=method).value


@dataclass
class BoundaryMassReport:
    flat_norm: float
    mass: float
    holds: bool


def boundary_mass_bound_check(A: PolyhedralChain, K: AmbientComplex,
                              tol: float = TOL_LP) -> BoundaryMassReport:
    """Check that the flat norm of a boundary is at most the mass of the filling."""
    if A.dimension != 2:
        raise ChainError("boundary_mass_bound_check expects a 2-chain")
    m = A.mass()
    fn = flat_norm(A.boundary(), K).value if not A.is_empty else 0.0
    return BoundaryMassReport(fn, m, fn <= m + tol)


def koch_tail_bound(i: int, k: int | float) -> float:
    """Sum over j = i+1..k of the per-step snowflake bound (3 sqrt3/16)(4/9)^j.

    ``k = math.inf`` gives the closed-form tail."""
    if i < 0:
        raise ValueError("i must be non-negative")
    if not k > i:
        raise ValueError(f"need i < k, got i={i}, k={k}")
    if math.isinf(k):
        return KOCH_STEP_AREA * (4.0 / 9.0) ** (i + 1) / (1.0 - 4.0 / 9.0)
    return float(sum(KOCH_STEP_AREA * (4.0 / 9.0) ** j for j in range(i + 1, int(k) + 1)))
