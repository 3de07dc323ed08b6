"""Box-counting dimension of the support of a polyhedral chain."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from flatgrowth.chains import ChainError, PolyhedralChain

DEFAULT_EXPONENTS = range(3, 11)


@dataclass
class BoxCountReport:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    residual_rms: float

    def rows(self):
        return [(float(e), float(n)) for e, n in zip(self.scales, self.counts)]


def default_scales(base_scale: float = 1.0) -> np.ndarray:
    return np.array([base_scale * 2.0 ** (-e) for e in DEFAULT_EXPONENTS])


def sample_support(chain: PolyhedralChain, spacing: float) -> np.ndarray:
    """Points on the support of the chain, no two consecutive ones on a
    simplex farther apart than ``spacing``."""
    c = chain.canonical()
    V = c.verts
    if c.dimension == 0:
        return V[:, 0].copy()
    if c.dimension == 1:
        L = np.hypot(*(V[:, 1] - V[:, 0]).T)
        n = np.maximum(1, np.ceil(L / spacing).astype(int))
        seg = np.repeat(np.arange(len(V)), n + 1)
        start = np.repeat(np.cumsum(n + 1) - (n + 1), n + 1)
        s = (np.arange(len(seg)) - start) / n[seg]
        return V[seg, 0] + s[:, None] * (V[seg, 1] - V[seg, 0])
    pts = []
    for tri in V:
        diam = max(np.hypot(*(tri[1] - tri[0])), np.hypot(*(tri[2] - tri[0])), np.hypot(*(tri[2] - tri[1])))
        k = max(1, int(math.ceil(diam / spacing)))
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        keep = i + j <= k
        u, v = i[keep] / k, j[keep] / k
        pts.append(tri[0] + u[:, None] * (tri[1] - tri[0]) + v[:, None] * (tri[2] - tri[0]))
    return np.concatenate(pts)


def box_counts(points: np.ndarray, eps: float) -> float:
    """Occupied grid cells at side eps, averaged over four grid offsets."""
    total = 0
    for off in ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)):
        cells = np.floor(points / eps - np.asarray(off)).astype(np.int64)
        cells -= cells.min(axis=0)
        ny = int(cells[:, 1].max()) + 1
        keys = cells[:, 0] * ny + cells[:, 1]
        size = int(cells[:, 0].max() + 1) * ny
        if size <= 50_000_000:
            # bitmap marking is linear time; sorting dominates otherwise
            seen = np.zeros(size, dtype=bool)
            seen[keys] = True
            total += int(np.count_nonzero(seen))
        else:
            total += len(np.unique(keys))
    return total / 4.0


def box_dimension(chain: PolyhedralChain, scales=None) -> tuple[float, BoxCountReport]:
    """Least-squares slope of log N(eps) against log(1/eps)."""
    if chain.canonical().is_empty:
        raise ChainError("box counting needs a nonempty chain")
    scales = default_scales() if scales is None else np.asarray(scales, dtype=float)
    if len(scales) < 4:
        raise ValueError("need at least 4 scales")
    if np.any(scales <= 0):
        raise ValueError("scales must be positive")
    if math.log10(scales.max() / scales.min()) < 1.5:
        raise ValueError("scales must span at least 1.5 decades")
    if chain.dimension == 2:
        # filled regions need samples per unit area, so sample each scale separately
        counts = np.array([box_counts(sample_support(chain, e / 4.0), e) for e in scales])
    else:
        pts = sample_support(chain, scales.min() / 8.0)
        counts = np.array([box_counts(pts, e) for e in scales])
    x = np.log(1.0 / scales)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    report = BoxCountReport(scales, counts, float(slope), float(intercept),
                            float(np.sqrt(np.mean(resid ** 2))))
    return float(slope), report
