"""Oriented simplices and polyhedral chains in the Euclidean plane.

A chain is stored as a coefficient vector plus an ``(N, r+1, 2)`` vertex
array, so that large chains (Koch stages with ~10^5 segments) stay cheap.
Canonical form resolves overlaps between same-dimension simplices:

* 0-chains: coincident points are merged.
* 1-chains: collinear segments are projected to their common line and
  resolved by interval arithmetic; adjacent pieces with equal coefficient
  are merged into maximal segments.
* 2-chains: overlapping triangles are overlaid with a vertical-slab
  (trapezoidal) decomposition; non-overlapping triangles pass through.

In canonical form every coefficient is positive (orientation carries sign
for r >= 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

EPS_GEOM = 1e-9
COEFF_TOL = 1e-12
_ANGLE_TOL = 1e-8


class ChainError(ValueError):
    pass


class DimensionMismatch(ChainError):
    pass


@dataclass(frozen=True)
class Simplex:
    """Oriented r-simplex; the orientation is the vertex order."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        r = len(verts) - 1
        if r not in (0, 1, 2):
            raise ChainError(f"planar simplices have 1 to 3 vertices, got {len(verts)}")
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ChainError("simplex coordinates must be finite")
        if r == 1 and verts[0] == verts[1]:
            raise ChainError("1-simplex with coincident vertices")
        if r == 2 and _signed_area(np.array(verts)[None])[0] == 0.0:
            raise ChainError("2-simplex with affinely dependent vertices")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def volume(self) -> float:
        """r-volume: 1 for a point, length for a segment, area for a triangle."""
        return float(_volumes(np.array(self.vertices)[None])[0])

    def faces(self) -> list[tuple[int, "Simplex"]]:
        """Signed faces ``(-1)^i [p_0, .., p_i omitted, .., p_r]``."""
        if self.dim == 0:
            raise ChainError("a 0-simplex has no faces")
        out = []
        for i in range(self.dim + 1):
            rest = self.vertices[:i] + self.vertices[i + 1:]
            out.append(((-1) ** i, Simplex(rest)))
        return out

    def __neg__(self) -> "PolyhedralChain":
        return -PolyhedralChain.from_terms([(1.0, self)])


def _signed_area(tris: np.ndarray) -> np.ndarray:
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _volumes(verts: np.ndarray) -> np.ndarray:
    r = verts.shape[1] - 1
    if r == 0:
        return np.ones(len(verts))
    if r == 1:
        return np.hypot(*(verts[:, 1] - verts[:, 0]).T)
    return np.abs(_signed_area(verts))


class PolyhedralChain:
    """A finite formal sum ``sum_l a_l s_l`` of oriented r-simplices.

    Values are immutable. ``==`` identifies chains with a common
    subdivision (canonical difference is empty, vertex tolerance
    ``EPS_GEOM``).
    """

    __slots__ = ("dimension", "coeffs", "verts", "_is_canonical", "_canon")

    def __init__(self, dimension: int, coeffs, verts, *, canonical: bool = False):
        if dimension not in (0, 1, 2):
            raise ChainError(f"unsupported chain dimension {dimension}")
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        verts = np.asarray(verts, dtype=float).reshape(len(coeffs), dimension + 1, 2)
        if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(verts))):
            raise ChainError("chain data must be finite")
        coeffs.flags.writeable = False
        verts.flags.writeable = False
        self.dimension = dimension
        self.coeffs = coeffs
        self.verts = verts
        self._is_canonical = canonical
        self._canon = self if canonical else None

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls, dimension: int) -> "PolyhedralChain":
        return cls(dimension, np.zeros(0), np.zeros((0, dimension + 1, 2)), canonical=True)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, Simplex]], dimension: int | None = None):
        terms = list(terms)
        if not terms:
            if dimension is None:
                raise ChainError("dimension required for an empty term list")
            return cls.empty(dimension)
        dims = {s.dim for _, s in terms}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed simplex dimensions {sorted(dims)}")
        r = dims.pop()
        if dimension is not None and dimension != r:
            raise DimensionMismatch(f"terms have dimension {r}, expected {dimension}")
        return cls(r, [a for a, _ in terms], [s.vertices for _, s in terms])

    @classmethod
    def simplex(cls, vertices: Sequence[Sequence[float]], coeff: float = 1.0):
        return cls.from_terms([(coeff, Simplex(tuple(map(tuple, vertices))))])

    @classmethod
    def polyline(cls, points, closed: bool = False, coeff: float = 1.0,
                 canonical: bool = False):
        """1-chain along a vertex path. ``canonical=True`` is for callers that
        guarantee a simple path without collinear consecutive edges."""
        pts = np.asarray(points, dtype=float)
        nxt = np.roll(pts, -1, axis=0) if closed else pts[1:]
        cur = pts if closed else pts[:-1]
        verts = np.stack([cur, nxt], axis=1)
        return cls(1, np.full(len(verts), float(coeff)), verts, canonical=canonical)

    # basic protocol -----------------------------------------------------
    def __len__(self):
        return len(self.coeffs)

    @property
    def terms(self) -> list[tuple[float, Simplex]]:
        return [(float(a), Simplex(tuple(map(tuple, v)))) for a, v in zip(self.coeffs, self.verts)]

    def __repr__(self):
        return f"PolyhedralChain(dimension={self.dimension}, terms={len(self)})"

    def _check_dim(self, other):
        if not isinstance(other, PolyhedralChain):
            return NotImplemented
        if other.dimension != self.dimension:
            raise DimensionMismatch(
                f"cannot combine {self.dimension}-chain with {other.dimension}-chain")
        return None

    def __add__(self, other):
        if self._check_dim(other) is NotImplemented:
            return NotImplemented
        return PolyhedralChain(self.dimension, np.concatenate([self.coeffs, other.coeffs]),
                               np.concatenate([self.verts, other.verts]))

    def __neg__(self):
        return PolyhedralChain(self.dimension, -self.coeffs, self.verts,
                               canonical=False)

    def __sub__(self, other):
        if self._check_dim(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        scalar = float(scalar)
        return PolyhedralChain(self.dimension, scalar * self.coeffs, self.verts)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyhedralChain):
            return NotImplemented
        if other.dimension != self.dimension:
            return False
        return (self - other).canonical().is_empty

    __hash__ = None

    @property
    def is_empty(self) -> bool:
        return len(self.coeffs) == 0

    # geometry -----------------------------------------------------------
    def volumes(self) -> np.ndarray:
        return _volumes(self.verts)

    def canonical(self) -> "PolyhedralChain":
        if self._canon is None:
            self._canon = _canonicalize(self)
        return self._canon

    def mass(self) -> float:
        c = self.canonical()
        return float(np.sum(np.abs(c.coeffs) * c.volumes()))

    def boundary(self) -> "PolyhedralChain":
        return boundary(self)

    def bbox(self) -> tuple[float, float, float, float]:
        pts = self.verts.reshape(-1, 2)
        if len(pts) == 0:
            return (0.0, 0.0, 0.0, 0.0)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


# ---------------------------------------------------------------------------
# operations

def mass(chain: PolyhedralChain) -> float:
    """``sum |a_l| |s_l|`` over the canonical form."""
    return chain.mass()


def boundary(chain: PolyhedralChain) -> PolyhedralChain:
    r = chain.dimension
    if r == 0:
        raise ChainError("boundary of a 0-chain is not defined")
    v, a = chain.verts, chain.coeffs
    if r == 1:
        coeffs = np.concatenate([a, -a])
        pts = np.concatenate([v[:, 1], v[:, 0]])[:, None, :]
        return PolyhedralChain(0, coeffs, pts).canonical()
    faces = np.concatenate([v[:, [1, 2]], v[:, [0, 2]], v[:, [0, 1]]])
    coeffs = np.concatenate([a, -a, a])
    return PolyhedralChain(1, coeffs, faces).canonical()


def combine(a: float, B: PolyhedralChain, b: float, B2: PolyhedralChain) -> PolyhedralChain:
    if B.dimension != B2.dimension:
        raise DimensionMismatch(f"cannot combine {B.dimension}-chain with {B2.dimension}-chain")
    return (a * B + b * B2).canonical()


def subdivide(chain: PolyhedralChain, refinement: str | int = "bisect") -> PolyhedralChain:
    """Subdivide every simplex.

    ``"bisect"`` halves segments and splits triangles into 4 congruent
    pieces; an integer ``n`` splits segments into n pieces and triangles
    into n^2. The result is left un-merged (canonicalizing would undo the
    subdivision) but compares equal to the input.
    """
    n = 2 if refinement == "bisect" else int(refinement)
    if n < 1:
        raise ChainError("refinement factor must be >= 1")
    r, v, a = chain.dimension, chain.verts, chain.coeffs
    if r == 0 or n == 1:
        return chain
    if r == 1:
        s = np.linspace(0.0, 1.0, n + 1)
        pts = v[:, None, 0] + s[None, :, None] * (v[:, None, 1] - v[:, None, 0])
        segs = np.stack([pts[:, :-1], pts[:, 1:]], axis=2).reshape(-1, 2, 2)
        return PolyhedralChain(1, np.repeat(a, n), segs)
    cells = []
    for i in range(n):
        for j in range(n - i):
            cells.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j < n - 1:
                cells.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    lam = np.array(cells, dtype=float) / n          # (C, 3, 2) lattice coords
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    tris = (v[:, None, None, 0] + lam[None, :, :, 0, None] * e1[:, None, None]
            + lam[None, :, :, 1, None] * e2[:, None, None])
    return PolyhedralChain(2, np.repeat(a, len(cells)), tris.reshape(-1, 3, 2))


def chains_equal(A: PolyhedralChain, B: PolyhedralChain) -> bool:
    return A == B


# ---------------------------------------------------------------------------
# canonicalization

def _canonicalize(chain: PolyhedralChain) -> PolyhedralChain:
    if chain.is_empty:
        return PolyhedralChain.empty(chain.dimension)
    if chain.dimension == 0:
        return _canon0(chain.coeffs, chain.verts[:, 0])
    if chain.dimension == 1:
        return _canon1(chain.coeffs, chain.verts)
    return _canon2(chain.coeffs, chain.verts)


def _cluster_points(pts: np.ndarray, tol: float = EPS_GEOM) -> np.ndarray:
    """Label points so that points within ``tol`` (transitively) share a label."""
    n = len(pts)
    if n < 2:
        return np.zeros(n, dtype=int)
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels


def _canon0(coeffs, pts):
    labels = _cluster_points(pts)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    total = np.bincount(inv, weights=coeffs)
    keep = np.abs(total) > COEFF_TOL
    return PolyhedralChain(0, total[keep], pts[first][keep][:, None, :], canonical=True)


def _group_lines(P, Q):
    """Assign a line-group id to each oriented segment ``P -> Q``.

    Returns (group ids, unit direction per group-member, flip mask). Segments
    are re-oriented along a canonical direction with angle in [0, pi).
    """
    d = Q - P
    theta = np.arctan2(d[:, 1], d[:, 0])
    flip = theta < 0
    theta = np.where(flip, theta + np.pi, theta)
    wrap = theta > np.pi - _ANGLE_TOL
    theta = np.where(wrap, theta - np.pi, theta)
    flip ^= wrap
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    c = u[:, 0] * P[:, 1] - u[:, 1] * P[:, 0]      # signed offset along the normal

    order = np.argsort(theta, kind="stable")
    tgid = np.empty(len(theta), dtype=int)
    tgid[order] = np.concatenate([[0], np.cumsum(np.diff(theta[order]) > _ANGLE_TOL)])
    order = np.lexsort((c, tgid))
    brk = np.concatenate([[True], (np.diff(tgid[order]) != 0)
                          | (np.diff(c[order]) > EPS_GEOM)])
    gid = np.empty(len(theta), dtype=int)
    gid[order] = np.cumsum(brk) - 1
    return gid, u, flip


def _canon1(coeffs, verts):
    P, Q = verts[:, 0], verts[:, 1]
    keep = np.hypot(*(Q - P).T) > EPS_GEOM
    P, Q, a = P[keep], Q[keep], coeffs[keep]
    if len(a) == 0:
        return PolyhedralChain.empty(1)
    gid, u, flip = _group_lines(P, Q)
    a = np.where(flip, -a, a)
    P, Q = np.where(flip[:, None], Q, P), np.where(flip[:, None], P, Q)

    # one reference direction per group (its first member)
    _, first = np.unique(gid, return_index=True)
    ug = u[first][gid]
    s0 = np.einsum("ij,ij->i", ug, P)
    s1 = np.einsum("ij,ij->i", ug, Q)

    eg = np.concatenate([gid, gid])
    es = np.concatenate([s0, s1])
    ea = np.concatenate([a, -a])
    ep = np.concatenate([P, Q])
    order = np.lexsort((es, eg))
    eg, es, ea, ep = eg[order], es[order], ea[order], ep[order]
    newc = np.concatenate([[True], (np.diff(eg) != 0) | (np.diff(es) > EPS_GEOM)])
    cid = np.cumsum(newc) - 1
    starts = np.flatnonzero(newc)
    cg = eg[starts]                      # group of each breakpoint cluster
    cpt = ep[starts]                     # representative point
    delta = np.bincount(cid, weights=ea)
    run = np.cumsum(delta)
    gstart = np.flatnonzero(np.concatenate([[True], np.diff(cg) != 0]))
    offset = np.repeat(np.concatenate([[0.0], run[gstart[1:] - 1]]),
                       np.diff(np.concatenate([gstart, [len(cg)]])))
    run = run - offset                   # coefficient on (cluster k, cluster k+1)

    nxt_same = np.concatenate([cg[1:] == cg[:-1], [False]])
    live = nxt_same & (np.abs(run) > COEFF_TOL)
    idx = np.flatnonzero(live)
    if len(idx) == 0:
        return PolyhedralChain.empty(1)
    # merge consecutive live intervals with equal coefficient
    cont = np.concatenate([[False], (idx[1:] == idx[:-1] + 1)
                           & (np.abs(run[idx[1:]] - run[idx[:-1]]) <= COEFF_TOL)])
    seg_start = idx[~cont]
    seg_last = idx[np.concatenate([~cont[1:], [True]])]
    c = run[seg_start]
    A, B = cpt[seg_start], cpt[seg_last + 1]
    neg = c < 0
    A, B = np.where(neg[:, None], B, A), np.where(neg[:, None], A, B)
    return PolyhedralChain(1, np.abs(c), np.stack([A, B], axis=1), canonical=True)


def _overlap_pairs(tris: np.ndarray) -> np.ndarray:
    """Index pairs (i < j) of triangles whose interiors overlap."""
    lo, hi = tris.min(axis=1), tris.max(axis=1)
    boxes = shapely.box(lo[:, 0] - EPS_GEOM, lo[:, 1] - EPS_GEOM,
                        hi[:, 0] + EPS_GEOM, hi[:, 1] + EPS_GEOM)
    i, j = shapely.STRtree(boxes).query(boxes, predicate="intersects")
    m = i < j
    i, j = i[m], j[m]
    if len(i) == 0:
        return np.zeros((0, 2), dtype=int)
    A, B = tris[i], tris[j]
    separated = np.zeros(len(i), dtype=bool)
    for T in (A, B):
        for k in range(3):
            e = T[:, (k + 1) % 3] - T[:, k]
            n = np.stack([-e[:, 1], e[:, 0]], axis=1)
            n /= np.linalg.norm(n, axis=1, keepdims=True)
            pa = np.einsum("ikj,ij->ik", A, n)
            pb = np.einsum("ikj,ij->ik", B, n)
            separated |= (pa.max(1) <= pb.min(1) + EPS_GEOM) | (pb.max(1) <= pa.min(1) + EPS_GEOM)
    return np.stack([i[~separated], j[~separated]], axis=1)


def _canon2(coeffs, verts):
    area = _signed_area(verts)
    keep = np.abs(area) > EPS_GEOM * EPS_GEOM
    verts, coeffs, area = verts[keep], coeffs[keep], area[keep]
    neg = area < 0
    verts = np.where(neg[:, None, None], verts[:, [0, 2, 1]], verts)
    coeffs = np.where(neg, -coeffs, coeffs)
    n = len(coeffs)
    if n == 0:
        return PolyhedralChain.empty(2)
    pairs = _overlap_pairs(verts)
    if len(pairs):
        g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        _, labels = connected_components(g, directed=False)
    else:
        labels = np.arange(n)
    counts = np.bincount(labels)
    single = counts[labels] == 1
    out_c = [coeffs[single]]
    out_v = [verts[single]]
    for lab in np.flatnonzero(counts > 1):
        members = np.flatnonzero(labels == lab)
        c, v = _overlay(coeffs[members], verts[members])
        out_c.append(c)
        out_v.append(v)
    c = np.concatenate(out_c)
    v = np.concatenate(out_v)
    live = np.abs(c) > COEFF_TOL
    c, v = c[live], v[live]
    neg = c < 0
    v = np.where(neg[:, None, None], v[:, [0, 2, 1]], v)
    return PolyhedralChain(2, np.abs(c), v, canonical=True)


def _overlay(coeffs, tris):
    """Vertical-slab decomposition of overlapping CCW triangles.

    Inside each slab no edge crosses another, so the slab splits into
    trapezoids on which the summed coefficient is constant.
    """
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    xs = [tris[:, :, 0].ravel()]
    p, r = edges[:, 0], edges[:, 1] - edges[:, 0]
    ii, jj = np.triu_indices(len(edges), 1)
    den = r[ii, 0] * r[jj, 1] - r[ii, 1] * r[jj, 0]
    ok = np.abs(den) > 1e-300
    ii, jj, den = ii[ok], jj[ok], den[ok]
    qp = p[jj] - p[ii]
    t = (qp[:, 0] * r[jj, 1] - qp[:, 1] * r[jj, 0]) / den
    u = (qp[:, 0] * r[ii, 1] - qp[:, 1] * r[ii, 0]) / den
    hit = (t > 0) & (t < 1) & (u > 0) & (u < 1)
    xs.append(p[ii[hit], 0] + t[hit] * r[ii[hit], 0])
    xs = np.sort(np.concatenate(xs))
    xs = xs[np.concatenate([[True], np.diff(xs) > EPS_GEOM])]

    x0e = np.minimum(edges[:, 0, 0], edges[:, 1, 0])
    x1e = np.maximum(edges[:, 0, 0], edges[:, 1, 0])
    nonvert = (x1e - x0e) > EPS_GEOM
    out_c, out_v = [], []
    for xa, xb in zip(xs[:-1], xs[1:]):
        act = nonvert & (x0e <= xa + EPS_GEOM) & (x1e >= xb - EPS_GEOM)
        if act.sum() < 2:
            continue
        e = edges[act]
        slope = (e[:, 1, 1] - e[:, 0, 1]) / (e[:, 1, 0] - e[:, 0, 0])
        ya = e[:, 0, 1] + slope * (xa - e[:, 0, 0])
        yb = e[:, 0, 1] + slope * (xb - e[:, 0, 0])
        order = np.argsort(ya + yb, kind="stable")
        ya, yb = ya[order], yb[order]
        xm = 0.5 * (xa + xb)
        for k in range(len(ya) - 1):
            la, lb, ua, ub = ya[k], yb[k], ya[k + 1], yb[k + 1]
            if (ua - la) <= EPS_GEOM and (ub - lb) <= EPS_GEOM:
                continue
            ym = 0.25 * (la + lb + ua + ub)
            w = float(np.dot(coeffs, _inside(tris, xm, ym)))
            if abs(w) <= COEFF_TOL:
                continue
            if ub - lb > EPS_GEOM:
                out_v.append([(xa, la), (xb, lb), (xb, ub)])
                out_c.append(w)
            if ua - la > EPS_GEOM:
                out_v.append([(xa, la), (xb, ub), (xa, ua)])
                out_c.append(w)
    if not out_c:
        return np.zeros(0), np.zeros((0, 3, 2))
    return np.array(out_c), np.array(out_v, dtype=float)


def _inside(tris, x, y) -> np.ndarray:
    """Strict point-in-triangle test for CCW triangles."""
    inside = np.ones(len(tris), dtype=bool)
    for k in range(3):
        a, b = tris[:, k], tris[:, (k + 1) % 3]
        cross = (b[:, 0] - a[:, 0]) * (y - a[:, 1]) - (b[:, 1] - a[:, 1]) * (x - a[:, 0])
        inside &= cross > 0
    return inside.astype(float)


# ---------------------------------------------------------------------------
# JSON chain format

def chain_to_json(chain: PolyhedralChain) -> dict:
    """``{"dimension", "vertices", "simplices": [{"coeff", "verts"}]}`` in canonical form."""
    c = chain.canonical()
    r = c.dimension
    pts = c.verts.reshape(-1, 2)
    if len(pts) == 0:
        return {"dimension": r, "vertices": [], "simplices": []}
    labels = _cluster_points(pts)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    # stable vertex numbering in order of first appearance
    rank = np.empty(len(first), dtype=int)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    idx = rank[inv].reshape(-1, r + 1)
    vertices = pts[np.sort(first)]
    return {
        "dimension": r,
        "vertices": [[float(x), float(y)] for x, y in vertices],
        "simplices": [{"coeff": float(a), "verts": [int(k) for k in row]}
                      for a, row in zip(c.coeffs, idx)],
    }


def chain_from_json(data: dict) -> PolyhedralChain:
    r = int(data["dimension"])
    verts = np.asarray(data["vertices"], dtype=float).reshape(-1, 2)
    simp = data["simplices"]
    if not simp:
        return PolyhedralChain.empty(r)
    idx = np.array([s["verts"] for s in simp], dtype=int)
    if idx.shape[1] != r + 1:
        raise ChainError(f"{r}-chain simplices need {r + 1} vertex indices")
    if idx.min() < 0 or idx.max() >= len(verts):
        raise ChainError("simplex vertex index out of range")
    return PolyhedralChain(r, [s["coeff"] for s in simp], verts[idx])
