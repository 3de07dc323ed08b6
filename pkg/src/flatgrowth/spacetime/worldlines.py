"""Worldlines: integral curves of the line field v with v contracted into theta equal to F."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flatgrowth.spacetime.forms import VOLUME, FormField


@dataclass
class Worldline:
    points: np.ndarray
    degenerate: bool = False
    spacelike: bool = False
    notes: list[str] = field(default_factory=list)


def line_vector(F: FormField, theta: FormField, point) -> np.ndarray:
    """Solve v contracted into theta = F at one event (3 equations, 3 unknowns)."""
    P = np.asarray(point, float)[None]
    M = np.zeros((3, 3))
    for k, e in enumerate(np.eye(3)):
        M[:, k] = theta.interior(tuple(e)).evaluate(P)[0]
    rhs = F.evaluate(P)[0]
    if abs(np.linalg.det(M)) < 1e-14:
        raise ValueError("volume element vanishes")
    return np.linalg.solve(M, rhs)


def worldline_trace(F: FormField, theta: FormField = VOLUME, seed=(0.0, 0.0, 0.0),
                    t_end: float = 1.0, step: float = 0.01, max_steps: int = 100_000,
                    degeneracy_tol: float = 1e-12) -> Worldline:
    """Trace the worldline through ``seed`` = (t, x1, x2) up to time ``t_end``
    with classical RK4. The vector is normalized so that dt(v) = 1; where
    dt(v) vanishes the line is spacelike and is followed by arc length, for
    a total length of ``t_end - seed[0]``."""
    if F.degree != 2 or theta.degree != 3:
        raise ValueError("need a 2-form flux and a 3-form volume element")
    y = np.asarray(seed, float).copy()
    pts = [y.copy()]
    out = Worldline(np.empty((0, 3)))
    prev_dir = None
    budget = max(t_end - y[0], step)
    arc = 0.0

    def direction(p):
        v = line_vector(F, theta, p)
        nv = np.linalg.norm(v)
        if nv < degeneracy_tol:
            return None, False
        if abs(v[0]) > 1e-9 * nv:
            return v / v[0], False
        u = v / nv
        if prev_dir is not None and u @ prev_dir < 0:
            u = -u
        return u, True

    for _ in range(max_steps):
        if y[0] >= t_end - 1e-15 or arc >= budget - 1e-15:
            break
        k1, sl = direction(y)
        if k1 is None:
            out.degenerate = True
            out.notes.append(f"flux vanishes at {y.tolist()}")
            break
        if sl:
            out.spacelike = True
            h = min(step, budget - arc)
        else:
            h = min(step, t_end - y[0])
        k2, _ = direction(y + 0.5 * h * k1)
        k3, _ = direction(y + 0.5 * h * k2) if k2 is not None else (None, False)
        k4, _ = direction(y + h * k3) if k3 is not None else (None, False)
        if k4 is None:
            out.degenerate = True
            out.notes.append(f"flux vanishes near {y.tolist()}")
            break
        y_new = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if sl:
            arc += float(np.linalg.norm(y_new - y))
        y = y_new
        prev_dir = k1 / np.linalg.norm(k1)
        pts.append(y.copy())
    if out.spacelike:
        out.notes.append("dt(v) vanished; traced by arc length")
    out.points = np.array(pts)
    return out


def polyline_distance(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Distance from each point to a polyline in R^3."""
    A, B = polyline[:-1], polyline[1:]
    d = B - A
    L2 = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
    out = np.empty(len(points))
    for n, p in enumerate(points):
        s = np.clip(np.einsum("ij,ij->i", p - A, d) / L2, 0.0, 1.0)
        out[n] = np.min(np.linalg.norm(A + s[:, None] * d - p, axis=1))
    return out
