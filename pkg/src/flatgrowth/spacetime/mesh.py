"""Oriented tetrahedral meshes of spacetime regions and simplex quadrature.

Coordinates are (t, x1, x2). A tetrahedron [p0, p1, p2, p3] is positively
oriented when det(p1 - p0, p2 - p0, p3 - p0) > 0, i.e. it agrees with
dt^dx1^dx2. Its boundary is [p1p2p3] - [p0p2p3] + [p0p1p3] - [p0p1p2].
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import permutations

import numpy as np
import triangle as tr

from flatgrowth.spacetime.forms import FormField, _perm_sign, basis


# ---------------------------------------------------------------------------
# quadrature

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def grundmann_moeller(dim: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (Q, dim) and weights (Q,) on the unit simplex {u >= 0, sum u <= 1},
    exact for polynomials of degree 2s + 1. Weights sum to 1/dim!."""
    d = 2 * s + 1
    pts, wts = [], []
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (d + dim - 2 * i) ** d / (
            math.factorial(i) * math.factorial(d + dim - i))
        for beta in _compositions(s - i, dim + 1):
            bary = (2 * np.array(beta) + 1) / (d + dim - 2 * i)
            pts.append(bary[1:])
            wts.append(w)
    P = np.array(pts)
    W = np.array(wts)
    P.flags.writeable = False
    W.flags.writeable = False
    return P, W


def integrate_form(form: FormField, simplices: np.ndarray, s: int = 2) -> float:
    """Integral of a k-form over oriented k-simplices (M, k+1, 3)."""
    simplices = np.asarray(simplices, float)
    if len(simplices) == 0 or not form.components:
        return 0.0
    k = simplices.shape[1] - 1
    if k != form.degree:
        raise ValueError(f"{form.degree}-form cannot be integrated over {k}-simplices")
    if k == 0:
        return float(form.evaluate(simplices[:, 0])[:, 0].sum())
    U, W = grundmann_moeller(k, s)
    P0 = simplices[:, 0]
    E = simplices[:, 1:] - P0[:, None]                     # (M, k, 3)
    X = P0[:, None, :] + np.einsum("qk,mkc->mqc", U, E)     # (M, Q, 3)
    flat = X.reshape(-1, 3)
    vals = form.evaluate(flat).reshape(len(simplices), len(U), -1)
    total = np.zeros(len(simplices))
    for col, idx in enumerate(basis(k)):
        if idx not in form.components:
            continue
        det = np.linalg.det(E[:, :, list(idx)]) if k > 1 else E[:, 0, idx[0]]
        total += det * (vals[:, :, col] @ W)
    return float(math.fsum(total))


# ---------------------------------------------------------------------------
# meshes

class TetMesh:
    """Tetrahedra over shared vertices. With ``orient=True`` each tetrahedron
    is made positive by its own volume sign; builders that know the
    orientation combinatorially (and may emit flat tetrahedra) pass False."""

    def __init__(self, vertices, tets, orient: bool = True):
        self.vertices = np.asarray(vertices, float)
        tets = np.asarray(tets, dtype=np.int64).reshape(-1, 4).copy()
        if orient:
            neg = self._signed_volumes(tets) < 0
            tets[neg] = tets[neg][:, [0, 1, 3, 2]]
        self.tets = tets

    def _signed_volumes(self, tets):
        P = self.vertices[tets]
        return np.linalg.det(P[:, 1:] - P[:, :1]) / 6.0

    @property
    def volumes(self) -> np.ndarray:
        return self._signed_volumes(self.tets)

    @property
    def simplices(self) -> np.ndarray:
        return self.vertices[self.tets]

    def boundary_faces(self) -> np.ndarray:
        """Oriented boundary triangles (F, 3) as vertex indices; faces shared
        by two tetrahedra with opposite orientation cancel."""
        faces = {}
        for tet in self.tets:
            for sign, f in ((1, (1, 2, 3)), (-1, (0, 2, 3)), (1, (0, 1, 3)), (-1, (0, 1, 2))):
                verts = tuple(int(tet[i]) for i in f)
                key = tuple(sorted(verts))
                sgn = sign * _perm_sign(verts)
                faces[key] = faces.get(key, 0) + sgn
        out = []
        for key, c in sorted(faces.items()):
            if c > 0:
                out.extend([key] * c)
            elif c < 0:
                out.extend([(key[0], key[2], key[1])] * (-c))
        return np.array(out, dtype=np.int64).reshape(-1, 3)

    def boundary_simplices(self) -> np.ndarray:
        return self.vertices[self.boundary_faces()]

    def concat(self, other: "TetMesh") -> "TetMesh":
        return TetMesh(np.vstack([self.vertices, other.vertices]),
                       np.vstack([self.tets, other.tets + len(self.vertices)]), orient=False)


def box_mesh(lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0), n: int = 1) -> TetMesh:
    """n^3 cubes, each split into six tetrahedra along its main diagonal."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    g = np.linspace(0.0, 1.0, n + 1)
    I, J, K = np.meshgrid(np.arange(n + 1), np.arange(n + 1), np.arange(n + 1), indexing="ij")
    verts = lo + (hi - lo) * np.stack([g[I.ravel()], g[J.ravel()], g[K.ravel()]], axis=1)

    def vid(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    tets = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for perm in permutations(range(3)):
                    cur = [i, j, k]
                    chain = [vid(*cur)]
                    for ax in perm:
                        cur[ax] += 1
                        chain.append(vid(*cur))
                    tets.append(chain)
    return TetMesh(verts, tets)


def prism_tets(bottom: np.ndarray, top: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Split prisms over counter-clockwise triangles into three positively
    oriented tetrahedra each. ``bottom`` and ``top`` hold vertex ids of the
    same planar vertex at the two times; the diagonal on every side face
    runs from the lower-id bottom vertex to the higher-id top vertex, so
    neighbouring prisms match."""
    out = []
    for tri in tris:
        tri = [int(v) for v in tri]
        a, b, c = sorted(tri)
        # orientation of the sorted order relative to the given CCW order
        ccw = _perm_sign([tri.index(v) for v in (a, b, c)])
        tets = [[bottom[a], bottom[b], bottom[c], top[c]],
                [bottom[a], bottom[b], top[b], top[c]],
                [bottom[a], top[a], top[b], top[c]]]
        for tet, sign in zip(tets, (1, -1, 1)):
            if sign * ccw < 0:
                tet[2], tet[3] = tet[3], tet[2]
            out.append(tet)
    return np.array(out, dtype=np.int64).reshape(-1, 4)


def extrude(points2d, tris, t0: float, t1: float, points2d_top=None) -> TetMesh:
    """Time slab [t0, t1] (t0 < t1) over a counter-clockwise planar
    triangulation; vertices may move linearly from ``points2d`` to
    ``points2d_top``."""
    P = np.asarray(points2d, float)
    Q = P if points2d_top is None else np.asarray(points2d_top, float)
    n = len(P)
    verts = np.vstack([np.column_stack([np.full(n, t0), P]), np.column_stack([np.full(n, t1), Q])])
    tets = prism_tets(np.arange(n), np.arange(n) + n, np.asarray(tris))
    return TetMesh(verts, tets, orient=False)


def polygon_triangulation(poly: np.ndarray) -> np.ndarray:
    """Constrained triangulation of a simple polygon's interior (vertex ids into ``poly``)."""
    n = len(poly)
    segs = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    out = tr.triangulate({"vertices": poly, "segments": segs}, "pQ")
    if len(out["vertices"]) != n:
        raise ValueError("polygon triangulation inserted Steiner points")
    tris = out["triangles"].copy()
    P = poly[tris]
    cw = ((P[:, 1, 0] - P[:, 0, 0]) * (P[:, 2, 1] - P[:, 0, 1])
          - (P[:, 1, 1] - P[:, 0, 1]) * (P[:, 2, 0] - P[:, 0, 0])) < 0
    tris[cw] = tris[cw][:, [0, 2, 1]]
    return tris


def koch_growth_region(params, t_end: float, substeps: int = 1) -> TetMesh:
    """Spacetime region swept by the filled snowflake C(t) for 0 <= t <= t_end.

    One time slab per growth interval, cut into ``substeps`` layers. The
    finished stage is extruded straight up and every active triangle rises
    from its base with the apex at its exact position on each layer time.
    The side faces of a rising triangle are ruled, not planar, so each layer
    of prisms slightly overfills the swept set; cross-sections are exact at
    the layer times and the volume converges like 1/substeps.
    """
    from flatgrowth.koch import _bumps, _edges, growth_index, stage_polygon, t_level

    if params.single_edge:
        raise ValueError("the filled region needs the closed snowflake")
    if substeps < 1:
        raise ValueError("substeps must be positive")
    last = growth_index(t_end)
    mesh = None
    for i in range(1, last + 1):
        t0, t1 = t_level(i - 1), min(t_level(i), t_end)
        prev = np.asarray(stage_polygon(params, i - 1))
        p, q = _edges(prev, True)
        a, b, _ = _bumps(p, q, 0.0)
        m = len(prev)
        loop = np.stack([p, a, b], axis=1).reshape(-1, 2)  # polygon with middle-third points
        static = polygon_triangulation(loop)
        ids_a = 3 * np.arange(m) + 1
        ids_b = 3 * np.arange(m) + 2
        ids_c = 3 * m + np.arange(m)
        tris = np.vstack([static, np.stack([ids_b, ids_a, ids_c], axis=1)])
        times = np.linspace(t0, t1, substeps + 1)
        layers = []
        for t in times:
            rel = params.vertex_height_ratio * (t - t0) * 2.0 ** i
            apex = _bumps(p, q, rel)[2] if rel > 0 else 0.5 * (a + b)
            pts = np.vstack([loop, apex])
            layers.append(np.column_stack([np.full(len(pts), t), pts]))
        n = len(layers[0])
        tets = np.vstack([prism_tets(np.arange(n) + j * n, np.arange(n) + (j + 1) * n, tris)
                          for j in range(substeps)])
        slab = TetMesh(np.vstack(layers), tets, orient=False)
        mesh = slab if mesh is None else mesh.concat(slab)
    return mesh
