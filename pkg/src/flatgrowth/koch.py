"""Koch snowflake stages and their continuous growth in time.

Stage k replaces the middle third of every edge of stage k-1 by the two
outer sides of a triangle. Adding the oriented boundary of the triangle
``[b, a, c]`` (``a``, ``b`` the middle-third points of edge ``p -> q``,
``c`` the apex) cancels the segment ``a -> b`` automatically.

Time schedule: level ``i`` grows during ``(t_{i-1}, t_i]`` with
``t_i = 1 - 2**-i``; its triangles rise linearly from height 0 to full
height over that interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from flatgrowth.chains import EPS_GEOM, PolyhedralChain

SQRT3_2 = math.sqrt(3.0) / 2.0
AREA_LIMIT = 2.0 * math.sqrt(3.0) / 5.0


@dataclass(frozen=True)
class KochParams:
    base_scale: float = 1.0
    vertex_height_ratio: float = 1.0
    levels: int = 0
    single_edge: bool = False

    def __post_init__(self):
        if not (0.0 < self.vertex_height_ratio <= 1.0):
            raise ValueError("vertex_height_ratio must lie in (0, 1]")
        if not self.base_scale > 0:
            raise ValueError("base_scale must be positive")
        if self.levels < 0:
            raise ValueError("levels must be >= 0")

    @property
    def n_edges0(self) -> int:
        return 1 if self.single_edge else 3


# ---------------------------------------------------------------------------
# time schedule

def t_level(i: int) -> float:
    """End of growth interval i: 1 - 2**-i (t_0 = 0)."""
    if i < 0:
        raise ValueError("level index must be >= 0")
    return 1.0 - 2.0 ** (-i)


def interval(i: int) -> tuple[float, float]:
    """Half-open growth interval (t_{i-1}, t_i] of level i >= 1."""
    if i < 1:
        raise ValueError("growth intervals start at i = 1")
    return t_level(i - 1), t_level(i)


def _check_t(t):
    if not (0.0 < t < 1.0):
        raise ValueError(f"time must lie in (0, 1), got {t!r}")


def growth_index(t: float) -> int:
    """I(t) = ceil(-log2(1 - t)), the level growing at time t."""
    _check_t(t)
    i = max(1, math.ceil(-math.log2(1.0 - t)))
    # guard against rounding in the logarithm near the interval ends
    while t > t_level(i):
        i += 1
    while i > 1 and t <= t_level(i - 1):
        i -= 1
    return i


def local_time(t: float) -> float:
    """tau(t) = t - t_{I(t)-1}, in (0, 2**-I(t)]."""
    return t - t_level(growth_index(t) - 1)


def normalized_height(t: float) -> float:
    """h(t) = 2**I(t) * tau(t), rising from 0 to 1 across each interval."""
    i = growth_index(t)
    return (2.0 ** i) * (t - t_level(i - 1))


def triangle_height(i: int, t: float, params: KochParams = KochParams()) -> float:
    """Height of a level-i triangle at time t (equilateral base 3**-i)."""
    if i < 1:
        raise ValueError("triangle levels start at i = 1")
    _check_t(t)
    full = SQRT3_2 * 3.0 ** (-i) * params.base_scale * params.vertex_height_ratio
    if t <= t_level(i - 1):
        return 0.0
    if t > t_level(i):
        return full
    return SQRT3_2 * (2.0 / 3.0) ** i * (t - t_level(i - 1)) * params.base_scale * params.vertex_height_ratio


def time_grid(n: int = 1000, levels: int = 8) -> np.ndarray:
    """Increasing times with n // levels points in each interval, ending at each t_i."""
    m = max(1, n // levels)
    pts = [np.linspace(t_level(i - 1), t_level(i), m + 1)[1:] for i in range(1, levels + 1)]
    return np.concatenate(pts)


# ---------------------------------------------------------------------------
# stages

def initial_polygon(params: KochParams) -> np.ndarray:
    s = params.base_scale
    if params.single_edge:
        return np.array([[0.0, 0.0], [s, 0.0]])
    return np.array([[0.0, 0.0], [s, 0.0], [0.5 * s, SQRT3_2 * s]])


def initial_chain(params: KochParams) -> PolyhedralChain:
    return PolyhedralChain.polyline(initial_polygon(params), closed=not params.single_edge)


def _edges(poly: np.ndarray, closed: bool):
    q = np.roll(poly, -1, axis=0) if closed else poly[1:]
    p = poly if closed else poly[:-1]
    return p, q


def _bumps(p, q, rel_height):
    """Middle-third points a, b and apex c for edges p -> q; the apex sits
    to the right of the edge (outside a counter-clockwise polygon) at
    ``rel_height`` times the equilateral height of the middle third."""
    d = q - p
    a = p + d / 3.0
    b = p + 2.0 * d / 3.0
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1)  # |normal| = |d|
    c = 0.5 * (a + b) + normal * (SQRT3_2 / 3.0) * rel_height
    return a, b, c


def _grow_polygon(poly, closed, rel_height):
    p, q = _edges(poly, closed)
    a, b, c = _bumps(p, q, rel_height)
    out = np.stack([p, a, c, b], axis=1).reshape(-1, 2)
    if not closed:
        out = np.vstack([out, poly[-1:]])
    return out


@lru_cache(maxsize=64)
def _stage_polygon_cached(base_scale, ratio, single_edge, k):
    params = KochParams(base_scale, ratio, 0, single_edge)
    if k == 0:
        poly = initial_polygon(params)
    else:
        prev = _stage_polygon_cached(base_scale, ratio, single_edge, k - 1)
        poly = _grow_polygon(prev, not single_edge, ratio)
    poly.flags.writeable = False
    return poly


def stage_polygon(params: KochParams, k: int) -> np.ndarray:
    """Vertex loop of stage k (counter-clockwise; open path in single-edge mode)."""
    if k < 0:
        raise ValueError("stage index must be >= 0")
    return _stage_polygon_cached(params.base_scale, params.vertex_height_ratio, params.single_edge, k)


def stage_triangles(params: KochParams, j: int) -> np.ndarray:
    """The (3 * 4**(j-1), 3, 2) triangles [b, a, c] added at step j >= 1."""
    if j < 1:
        raise ValueError("steps start at j = 1")
    p, q = _edges(stage_polygon(params, j - 1), not params.single_edge)
    a, b, c = _bumps(p, q, params.vertex_height_ratio)
    return np.stack([b, a, c], axis=1)


def koch_stage(params: KochParams, k: int | None = None, route: str = "algebraic") -> PolyhedralChain:
    """Stage-k chain B_k as a canonical 1-chain.

    ``algebraic`` sums B_0 and the triangle boundaries and canonicalizes;
    ``polygon`` emits the vertex loop directly. Both give equal chains.
    """
    if k is None:
        k = params.levels
    if k < 0:
        raise ValueError("stage index must be >= 0")
    closed = not params.single_edge
    if route == "polygon":
        return PolyhedralChain.polyline(stage_polygon(params, k), closed=closed, canonical=True)
    if route != "algebraic":
        raise ValueError(f"unknown route {route!r}")
    chain = initial_chain(params)
    for j in range(1, k + 1):
        tris = stage_triangles(params, j)
        chain = chain + PolyhedralChain(2, np.ones(len(tris)), tris).boundary()
    return chain.canonical()


@dataclass
class StageReport:
    step: int
    triangles: int
    side_length: float
    new_sides_length: float


def koch_construction(params: KochParams, k: int | None = None) -> list[StageReport]:
    """Per-step counts and added lengths for steps 1..k."""
    if k is None:
        k = params.levels
    out = []
    for j in range(1, k + 1):
        tris = stage_triangles(params, j)
        sides = np.hypot(*(tris[:, 2] - tris[:, 0]).T) + np.hypot(*(tris[:, 2] - tris[:, 1]).T)
        out.append(StageReport(j, len(tris), float(np.hypot(*(tris[0, 0] - tris[0, 1]))),
                               float(sides.sum())))
    return out


# ---------------------------------------------------------------------------
# growth in time

@dataclass
class GrowingChainState:
    t: float
    finished_levels: int
    active_height: float
    active_triangles: int
    chain: PolyhedralChain


def _active_geometry(params: KochParams, t: float):
    i = growth_index(t)
    prev = stage_polygon(params, i - 1)
    rel = params.vertex_height_ratio * normalized_height(t)
    return i, prev, rel


def chain_at_time(params: KochParams, t: float) -> GrowingChainState:
    """B(t): finished levels below I(t) plus the partially grown level I(t)."""
    i, prev, rel = _active_geometry(params, t)
    closed = not params.single_edge
    height = triangle_height(i, t, params)
    if height <= EPS_GEOM:
        # apices still within vertex tolerance of their bases
        poly = prev
    else:
        poly = _grow_polygon(prev, closed, rel)
    n_active = len(prev) if closed else len(prev) - 1
    chain = PolyhedralChain.polyline(poly, closed=closed, canonical=True)
    return GrowingChainState(t, i - 1, height, n_active, chain)


def filled_chain(params: KochParams, t_or_k) -> PolyhedralChain:
    """C(t) (or C_k): the 2-chain of disjoint triangles with boundary B(t)."""
    if params.single_edge:
        parts = []
    else:
        parts = [initial_polygon(params)[None]]
    if _is_stage(t_or_k):
        k, last = int(t_or_k), None
    else:
        i, prev, rel = _active_geometry(params, float(t_or_k))
        k = i - 1
        p, q = _edges(prev, not params.single_edge)
        a, b, c = _bumps(p, q, rel)
        last = np.stack([b, a, c], axis=1) if triangle_height(i, float(t_or_k), params) > EPS_GEOM else None
    parts += [stage_triangles(params, j) for j in range(1, k + 1)]
    if last is not None:
        parts.append(last)
    if not parts:
        return PolyhedralChain.empty(2)
    tris = np.concatenate(parts)
    return PolyhedralChain(2, np.ones(len(tris)), tris, canonical=True)


def _is_stage(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def perimeter_area(params: KochParams, t_or_k) -> tuple[float, float]:
    """(mass of B, mass of C) at an integer stage or a time in (0, 1)."""
    if _is_stage(t_or_k):
        perim = koch_stage(params, int(t_or_k), route="polygon").mass()
    else:
        perim = chain_at_time(params, float(t_or_k)).chain.mass()
    return perim, filled_chain(params, t_or_k).mass()


def mass_lipschitz_constant(params: KochParams, t: float) -> float:
    """Bound on |d mass(B(t)) / dt| inside the interval containing t.

    Each active triangle has two sides of length sqrt((e/6)**2 + h**2),
    whose h-derivative is at most 2, and h grows at rate
    ratio * (sqrt3/2) * (e/3) * 2**I for an edge of length e."""
    i, prev, _ = _active_geometry(params, t)
    p, q = _edges(prev, not params.single_edge)
    e = np.hypot(*(q - p).T)
    return float(np.sum(2.0 * params.vertex_height_ratio * SQRT3_2 * (e / 3.0) * 2.0 ** i))


# ---------------------------------------------------------------------------
# Cantor set swept upward

@dataclass
class CantorGrowth:
    t: float
    level: int
    alpha: float
    intervals: np.ndarray
    base: PolyhedralChain
    swept: PolyhedralChain

    @property
    def swept_mass(self) -> float:
        return self.swept.mass()


def cantor_intervals(level: int, alpha: float = 1.0 / 3.0) -> np.ndarray:
    """Level-L middle-alpha Cantor approximation of [0, 1] as (2**L, 2) intervals."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    iv = np.array([[0.0, 1.0]])
    for _ in range(level):
        a, b = iv[:, 0], iv[:, 1]
        keep = (1.0 - alpha) / 2.0 * (b - a)
        iv = np.stack([np.stack([a, a + keep], 1), np.stack([b - keep, b], 1)], 1).reshape(-1, 2)
    return iv


def cantor_growth(t: float, level: int = 2, alpha: float = 1.0 / 3.0) -> CantorGrowth:
    """[0,1] x {0} together with the Cantor approximation swept to height t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    iv = cantor_intervals(level, alpha)
    base = PolyhedralChain.simplex([(0.0, 0.0), (1.0, 0.0)])
    if t == 0:
        swept = PolyhedralChain.empty(2)
    else:
        a, b = iv[:, 0], iv[:, 1]
        z, h = np.zeros_like(a), np.full_like(a, t)
        lower = np.stack([np.stack([a, z], 1), np.stack([b, z], 1), np.stack([b, h], 1)], 1)
        upper = np.stack([np.stack([a, z], 1), np.stack([b, h], 1), np.stack([a, h], 1)], 1)
        tris = np.concatenate([lower, upper])
        swept = PolyhedralChain(2, np.ones(len(tris)), tris, canonical=True)
    return CantorGrowth(t, level, alpha, iv, base, swept)
