"""Riemann maps from a disk onto polygons and the induced region evolution.

The map is built with the geodesic zipper algorithm. For boundary points
z_0, z_1, ..., z_n of the target G:

1. ``i sqrt((z - z_1) / (z - z_0))`` opens the edge [z_0, z_1] onto the
   real line and sends G into the upper half-plane H.
2. For each later point with current image a in H, the map
   f_a(z) = M sqrt(1 + (d / M)**2), M = z / (1 - z / c),
   c = |a|^2 / Re a, d = |a|^2 / Im a, removes the circular arc from 0 to a
   that meets the real axis at a right angle, sending a to 0.
3. ``s (z / (1 - z / p))**2`` (p the image of z_0, s = +-1) straightens
   the last arc, and a Moebius map sends H to the unit disk with the
   anchor going to 0.

All factors have explicit inverses, so the disk-to-G map phi is the
inverse chain and phi^-1 is the forward chain. The region is parametrized
by the disk B(0, 2): ``phi(w) = Phi(w / 2)`` for the unit-disk map Phi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from flatgrowth.chains import EPS_GEOM, ChainError, PolyhedralChain, _cluster_points

PARAM_RADIUS = 2.0


class ConformalError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# target regions

@dataclass
class TargetRegion:
    """A simple polygon with counter-clockwise vertex loop (no repeated end point)."""

    vertices: np.ndarray
    anchor: complex | None = None

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if len(V) > 1 and np.allclose(V[0], V[-1]):
            V = V[:-1]
        if len(V) < 3:
            raise ChainError("a target polygon needs at least 3 vertices")
        ring = shapely.LinearRing(V)
        if not ring.is_simple:
            raise ChainError("target polygon is self-intersecting")
        if not shapely.Polygon(V).exterior.is_ccw:
            V = V[::-1].copy()
        self.vertices = V
        if self.anchor is None:
            poly = self.polygon
            c = poly.centroid
            if not poly.contains(c):
                c = shapely.polylabel(poly, tolerance=1e-3 * math.sqrt(poly.area))
            self.anchor = complex(c.x, c.y)
        elif not self.polygon.contains(shapely.Point(self.anchor.real, self.anchor.imag)):
            raise ChainError("anchor must lie inside the target")

    @property
    def polygon(self) -> shapely.Polygon:
        return shapely.Polygon(self.vertices)

    @property
    def diameter(self) -> float:
        V = self.vertices
        return float(np.max(np.hypot(*(V[:, None] - V[None]).reshape(-1, 2).T)))

    @classmethod
    def circle(cls, radius: float = PARAM_RADIUS, n: int = 256, center=(0.0, 0.0)) -> "TargetRegion":
        th = 2 * np.pi * np.arange(n) / n
        return cls(np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]),
                   complex(*center))

    @classmethod
    def from_chain(cls, chain: PolyhedralChain) -> "TargetRegion":
        """Vertex loop of a 1-chain that is a single closed simple polygon."""
        c = chain.canonical()
        if c.dimension != 1 or c.is_empty:
            raise ChainError("need a nonempty 1-chain")
        if not np.allclose(c.coeffs, c.coeffs[0]):
            raise ChainError("polygon chain must have a single coefficient")
        pts = c.verts.reshape(-1, 2)
        labels = _cluster_points(pts, 10 * EPS_GEOM)
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        ends = inv.reshape(-1, 2)
        succ = {}
        for a, b in ends:
            if a in succ:
                raise ChainError("chain is not a simple closed loop")
            succ[a] = b
        loop = [ends[0, 0]]
        while True:
            nxt = succ.get(loop[-1])
            if nxt is None:
                raise ChainError("chain is not closed")
            if nxt == loop[0]:
                break
            loop.append(nxt)
            if len(loop) > len(ends):
                raise ChainError("chain is not a single loop")
        if len(loop) != len(ends):
            raise ChainError("chain has more than one component")
        return cls(pts[first][loop])

    def boundary_samples(self, spacing: float | None = None, per_edge: int | None = None) -> np.ndarray:
        """Points along the boundary including every vertex, first point a vertex."""
        V = self.vertices
        W = np.roll(V, -1, axis=0)
        L = np.hypot(*(W - V).T)
        if per_edge is not None:
            n = np.full(len(V), int(per_edge))
        else:
            spacing = spacing or L.sum() / 1024
            n = np.maximum(1, np.ceil(L / spacing - 1e-9).astype(int))
        seg = np.repeat(np.arange(len(V)), n)
        start = np.repeat(np.cumsum(n) - n, n)
        s = (np.arange(len(seg)) - start) / n[seg]
        return V[seg] + s[:, None] * (W[seg] - V[seg])


# ---------------------------------------------------------------------------
# elementary factors

def _slit_params(a: complex) -> tuple[float, float]:
    d = abs(a) ** 2 / a.imag
    c = abs(a) ** 2 / a.real if abs(a.real) > 1e-14 * abs(a) else math.inf
    return c, d


def _f_forward(z, c, d):
    M = z if math.isinf(c) else z / (1.0 - z / c)
    return M * np.sqrt(1.0 + (d / M) ** 2)


def _closed_sqrt(w):
    """Principal square root on the closed upper half-plane; a real w is
    read as the limit from above (no -0.0 imaginary parts)."""
    return np.sqrt(w.real + 1j * np.abs(w.imag))


def _f_inverse(w, c, d):
    # sqrt(w - d) sqrt(w + d) is the branch of sqrt(w**2 - d**2) mapping the
    # closed half-plane into itself, so boundary points land on the right side
    M = _closed_sqrt(w - d) * _closed_sqrt(w + d)
    return M if math.isinf(c) else M / (1.0 + M / c)


# ---------------------------------------------------------------------------
# the map

@dataclass
class DiskMap:
    """Conformal map from the disk B(0, 2) onto a polygon approximation of G."""

    z0: complex
    z1: complex
    steps: np.ndarray            # (n, 3) rows (c, d, scale); c = inf for a vertical slit
    p: float                     # image of z0 before the final fold
    sign: float
    A: complex                   # half-plane image of the anchor
    rotation: complex            # unit factor fixing phi'(0) > 0
    anchor: complex
    boundary_points: np.ndarray  # complex boundary samples, in order
    boundary_angles: np.ndarray  # their prevertex angles on |w| = 2
    target: TargetRegion | None = field(default=None, repr=False)

    # unit-disk level --------------------------------------------------------
    def _to_half_plane(self, z):
        """Forward zipper chain G -> H."""
        z = np.asarray(z, dtype=complex)
        w = 1j * np.sqrt((z - self.z1) / (z - self.z0))
        for c, d, sc in self.steps:
            w = _f_forward(w, c, d) / sc
        if math.isinf(self.p):
            M = w
        else:
            M = w / (1.0 - w / self.p)
        return self.sign * M * M

    def _from_half_plane(self, w):
        w = np.asarray(w, dtype=complex)
        # square root of w / sign inside the quadrant that folds onto H
        M = _closed_sqrt(w) if self.sign > 0 else 1j * _closed_sqrt(w)
        z = M if math.isinf(self.p) else M / (1.0 + M / self.p)
        for c, d, sc in self.steps[::-1]:
            z = _f_inverse(z * sc, c, d)
        q = -z * z
        return (self.z1 - q * self.z0) / (1.0 - q)

    def unit_map(self, u):
        """Phi: unit disk -> G."""
        u = np.asarray(u, dtype=complex) * self.rotation
        w = (self.A - u * np.conj(self.A)) / (1.0 - u)
        return self._from_half_plane(w)

    def unit_inverse(self, z):
        w = self._to_half_plane(z)
        return (w - self.A) / (w - np.conj(self.A)) / self.rotation

    # B(0, 2) level --------------------------------------------------------------
    def __call__(self, w):
        """phi on the disk of radius 2."""
        return self.unit_map(np.asarray(w, dtype=complex) / PARAM_RADIUS)

    def inverse(self, z, polish: bool = True, tol: float = 1e-12, max_iter: int = 20):
        """phi^-1 by the forward chain, optionally refined by Newton steps on phi."""
        z = np.asarray(z, dtype=complex)
        w = PARAM_RADIUS * self.unit_inverse(z)
        if not polish:
            return w
        for _ in range(max_iter):
            r = self(w) - z
            if np.all(np.abs(r) <= tol * (1.0 + np.abs(z))):
                break
            w = w - r / self.derivative(w)
        return w

    def derivative(self, w, h: float = 1e-6):
        w = np.asarray(w, dtype=complex)
        return (self(w + h) - self(w - h)) / (2.0 * h)


def fit_riemann_map(G: TargetRegion, resolution: int | None = None, spacing: float | None = None) -> DiskMap:
    """Zipper fit through boundary samples of G (``resolution`` points per
    edge, or a target ``spacing``; default about 1024 points in total)."""
    pts = G.boundary_samples(spacing=spacing, per_edge=resolution)
    z = pts[:, 0] + 1j * pts[:, 1]
    n = len(z)
    if n < 3:
        raise ConformalError("need at least 3 boundary samples")
    z0, z1 = complex(z[0]), complex(z[1])
    anchor = complex(G.anchor)
    with np.errstate(divide="ignore", invalid="ignore"):
        rest = 1j * np.sqrt((z[2:] - z1) / (z[2:] - z0))
        a_img = 1j * np.sqrt((anchor - z1) / (anchor - z0))
    p = math.inf  # image of z0; stays at infinity until the first non-vertical slit
    steps = []
    for k in range(len(rest)):
        a = complex(rest[k])
        if not a.imag > 0:
            raise ConformalError(f"boundary sample {k + 2} left the upper half-plane (image {a})")
        c, d = _slit_params(a)
        steps.append((c, d))
        rest[k + 1:] = _f_forward(rest[k + 1:], c, d)
        a_img = complex(_f_forward(np.array([a_img]), c, d)[0])
        if math.isinf(p):
            if not math.isinf(c):
                p = float((-c * np.sqrt(1.0 + (d / -c) ** 2)).real)
        else:
            p = float(_f_forward(np.array([p + 0j]), c, d)[0].real)
        # the slit maps commute with scaling; renormalize so images stay O(1)
        sc = float(abs(rest[k + 1])) if k + 1 < len(rest) else 1.0
        rest[k + 1:] /= sc
        a_img /= sc
        p /= sc
        steps[-1] = (c, d, sc)
    steps = np.array(steps, dtype=float).reshape(-1, 3)
    M = a_img if math.isinf(p) else a_img / (1.0 - a_img / p)
    sign = 1.0 if (M * M).imag > 0 else -1.0
    A = sign * M * M
    if not A.imag > 0:
        raise ConformalError("anchor did not land in the upper half-plane")
    dm = DiskMap(z0, z1, steps, p, sign, A, 1.0 + 0j, anchor, z, np.zeros(n), G)
    # fix the rotation so that phi'(0) > 0
    dm.rotation = np.exp(-1j * np.angle(derivative_at_center(dm)))
    dm.boundary_angles = _boundary_angles(dm, z)
    return dm


def derivative_at_center(dm: DiskMap, r: float = 0.5, n: int = 128) -> complex:
    """phi'(0) by the trapezoid rule on the Cauchy integral over |w| = r; unlike
    a difference quotient it does not amplify rounding in the zipper chain."""
    e = np.exp(2j * np.pi * np.arange(n) / n)
    return complex(np.mean(dm(r * e) / e) / r)


def _boundary_angles(dm: DiskMap, z: np.ndarray) -> np.ndarray:
    """Prevertex angles of the boundary samples (they map onto |w| = 2).

    The forward chain is singular exactly on the boundary, so each sample
    is pushed a tiny distance into G along the bisector of the inward
    normals of its neighbouring chords."""
    prev = z - np.roll(z, 1)
    nxt = np.roll(z, -1) - z
    inward = 1j * (prev / np.abs(prev) + nxt / np.abs(nxt))
    inward /= np.maximum(np.abs(inward), 1e-300)
    eps = 1e-10 * (dm.target.diameter if dm.target is not None else 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = dm.unit_inverse(z + eps * inward)
    return np.mod(np.angle(u), 2 * np.pi)


# ---------------------------------------------------------------------------
# diagnostics

def cauchy_riemann_residual(f, radius: float = PARAM_RADIUS, collar: float = 0.05,
                            n_r: int = 12, n_theta: int = 48, h: float = 1e-3) -> float:
    """RMS of the relative Cauchy-Riemann defect |(u_x - v_y, u_y + v_x)| / |grad u|
    over a polar grid of the disk of the given radius minus a boundary collar.

    Partials use the fourth-order central stencil; with h = 1e-3 truncation
    stays near 1e-12 while rounding in f is not amplified by a tiny h."""
    r = np.linspace(0.0, radius - collar, n_r + 1)[1:]
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    w = (r[:, None] * np.exp(1j * th[None])).ravel()
    w = np.concatenate([[0j], w])

    def partial(step):
        return (-f(w + 2 * step) + 8 * f(w + step) - 8 * f(w - step) + f(w - 2 * step)) / (12 * h)

    fx = partial(h)
    fy = partial(1j * h)
    ux, vx, uy, vy = fx.real, fx.imag, fy.real, fy.imag
    defect = np.hypot(ux - vy, uy + vx)
    scale = np.hypot(ux, uy) + np.hypot(vx, vy)
    return float(np.sqrt(np.mean((2 * defect / np.maximum(scale, 1e-300)) ** 2)))


def map_residual(dm: DiskMap) -> float:
    return cauchy_riemann_residual(dm)


def fold_count(dm: DiskMap, n_r: int = 24, n_theta: int = 96, radius: float = PARAM_RADIUS - 0.05) -> int:
    """Inverted triangles in the image of a polar disk mesh (0 for an injective map)."""
    r = np.linspace(0.0, radius, n_r + 1)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    pts = [0j] + [ri * np.exp(1j * t) for ri in r[1:] for t in th]
    W = dm(np.array(pts))
    tris = []
    for k in range(n_theta):
        tris.append((0, 1 + k, 1 + (k + 1) % n_theta))
    for i in range(1, n_r):
        base0, base1 = 1 + (i - 1) * n_theta, 1 + i * n_theta
        for k in range(n_theta):
            k1 = (k + 1) % n_theta
            tris.append((base0 + k, base1 + k, base1 + k1))
            tris.append((base0 + k, base1 + k1, base0 + k1))
    T = np.array(tris)
    a, b, c = W[T[:, 0]], W[T[:, 1]], W[T[:, 2]]
    area = ((b - a).real * (c - a).imag - (b - a).imag * (c - a).real)
    return int(np.sum(area <= 0))


# ---------------------------------------------------------------------------
# evolution

def evolve_region(dm: DiskMap, t: float, n0: int = 512, budget: float | None = None,
                  max_points: int = 200_000) -> np.ndarray:
    """Closed polyline (N, 2) of the image of the circle |w| = t, 1 <= t < 2.

    Angles are bisected wherever the image chord exceeds ``budget``
    (default 0.2% of the target diameter)."""
    if not (1.0 <= t < PARAM_RADIUS):
        raise ValueError("evolution time must lie in [1, 2)")
    if budget is None:
        diam = dm.target.diameter if dm.target is not None else 1.0
        budget = 2e-3 * diam
    th = 2 * np.pi * np.arange(n0) / n0
    z = dm(t * np.exp(1j * th))
    while len(th) < max_points:
        nxt_z = np.roll(z, -1)
        long = np.abs(nxt_z - z) > budget
        if not np.any(long):
            break
        nxt_th = np.roll(th, -1)
        nxt_th[-1] += 2 * np.pi
        mid = 0.5 * (th[long] + nxt_th[long])
        zm = dm(t * np.exp(1j * mid))
        th = np.concatenate([th, np.mod(mid, 2 * np.pi)])
        z = np.concatenate([z, zm])
        order = np.argsort(th)
        th, z = th[order], z[order]
    return np.column_stack([z.real, z.imag])


def polygon_area(curve: np.ndarray) -> float:
    x, y = curve[:, 0], curve[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def max_curvature(curve: np.ndarray) -> float:
    """Largest turning angle per unit length over the vertices of a closed polyline."""
    e_in = curve - np.roll(curve, 1, axis=0)
    e_out = np.roll(curve, -1, axis=0) - curve
    a_in = np.arctan2(e_in[:, 1], e_in[:, 0])
    a_out = np.arctan2(e_out[:, 1], e_out[:, 0])
    turn = np.abs(np.angle(np.exp(1j * (a_out - a_in))))
    ell = 0.5 * (np.hypot(*e_in.T) + np.hypot(*e_out.T))
    return float(np.max(turn / np.maximum(ell, 1e-300)))


def nesting_fraction(inner: np.ndarray, outer: np.ndarray, tol: float = 1e-9) -> float:
    """Share of the inner curve's samples inside (or within tol of) the outer curve."""
    poly = shapely.Polygon(outer)
    inside = shapely.contains_xy(poly, inner[:, 0], inner[:, 1])
    if not np.all(inside):
        ring = poly.exterior
        pts = shapely.points(inner[~inside])
        inside[~inside] = shapely.distance(ring, pts) <= tol
    return float(np.mean(inside))


def hausdorff(curve: np.ndarray, polygon: np.ndarray, densify: float = 0.02) -> float:
    """Hausdorff distance between two closed polylines (segments densified by ``densify``)."""
    a = shapely.LinearRing(curve)
    b = shapely.LinearRing(polygon)
    return float(shapely.hausdorff_distance(a, b, densify=densify))


@dataclass
class EvolutionFamily:
    times: list[float]
    curves: list[np.ndarray]
    areas: list[float]
    nesting: list[float]
    simple: list[bool]


def evolution_family(dm: DiskMap, times, **kw) -> EvolutionFamily:
    times = sorted(float(t) for t in times)
    curves = [evolve_region(dm, t, **kw) for t in times]
    areas = [polygon_area(c) for c in curves]
    nest = [nesting_fraction(curves[k], curves[k + 1]) for k in range(len(curves) - 1)]
    simple = [bool(shapely.LinearRing(c).is_simple) for c in curves]
    return EvolutionFamily(times, curves, areas, nest, simple)


@dataclass
class SelfMapResult:
    point: complex
    converged: bool
    residual: float


def self_map(dm: DiskMap, t: float, x, tol: float = 1e-12) -> SelfMapResult:
    """phi(t * phi^-1(x)) for x in R_1 (the image of |w| <= 1)."""
    x = complex(x)
    if dm.target is not None and not dm.target.polygon.contains(shapely.Point(x.real, x.imag)):
        raise ValueError("point lies outside the target region")
    w = complex(dm.inverse(np.array([x]), tol=tol)[0])
    res = abs(complex(dm(np.array([w]))[0]) - x)
    if abs(w) > 1.0 + 1e-9:
        raise ValueError(f"point lies outside R_1 (|phi^-1(x)| = {abs(w):.6g})")
    converged = res <= 1e3 * tol * (1.0 + abs(x))
    y = complex(dm(np.array([t * w]))[0])
    return SelfMapResult(y, converged, res)


@dataclass
class BoundaryLimitReport:
    times: list[float]
    distances: list[float]
    monotone: bool


def boundary_limit(dm: DiskMap, G: TargetRegion, times=(1.5, 1.9, 1.99), **kw) -> BoundaryLimitReport:
    dist = [hausdorff(evolve_region(dm, t, **kw), G.vertices) for t in times]
    mono = all(dist[k + 1] <= dist[k] for k in range(len(dist) - 1))
    return BoundaryLimitReport(list(times), dist, mono)
