"""Differential forms on the spacetime chart (t, x1, x2).

A basis form is a sorted index tuple over coordinates 0 = t, 1 = x1,
2 = x2; ``(0, 2)`` is dt^dx2. Components are callables ``f(t, x1, x2)``
that accept numpy arrays. When every component is a ``Polynomial`` the
field is closed under d, wedge and contraction with exact arithmetic.
"""
from __future__ import annotations

from itertools import combinations
from typing import Callable

import numpy as np

from flatgrowth.spacetime.polynomial import Polynomial

_NAMES = "t12"


def parse_key(key) -> tuple[int, ...]:
    if isinstance(key, tuple):
        idx = tuple(int(i) for i in key)
    else:
        idx = tuple(_NAMES.index(ch) for ch in str(key))
    if list(idx) != sorted(set(idx)) or any(i not in (0, 1, 2) for i in idx):
        raise ValueError(f"basis index {key!r} must be strictly increasing over t,1,2")
    return idx


def key_name(idx: tuple[int, ...]) -> str:
    return "".join(_NAMES[i] for i in idx)


def basis(degree: int) -> list[tuple[int, ...]]:
    return list(combinations(range(3), degree))


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _as_callable(f):
    if isinstance(f, Polynomial) or callable(f):
        return f
    if np.isscalar(f):
        return Polynomial.constant(float(f))
    raise TypeError(f"component must be callable, polynomial or number, got {type(f)}")


def _zero(t, x1, x2):
    return np.zeros(np.broadcast(np.asarray(t), np.asarray(x1), np.asarray(x2)).shape)


def _product(f, g):
    if isinstance(f, Polynomial) and isinstance(g, Polynomial):
        return f * g
    return lambda t, x1, x2: f(t, x1, x2) * g(t, x1, x2)


def _sum(f, g, sg=1.0):
    if isinstance(f, Polynomial) and isinstance(g, Polynomial):
        return f + sg * g
    return lambda t, x1, x2: f(t, x1, x2) + sg * g(t, x1, x2)


def _scaled(f, a):
    if isinstance(f, Polynomial):
        return a * f
    return lambda t, x1, x2: a * f(t, x1, x2)


class FormField:
    """A differential form of fixed degree given by component functions."""

    def __init__(self, degree: int, components: dict | None = None):
        if degree not in (0, 1, 2, 3):
            raise ValueError("form degree must be 0..3")
        self.degree = degree
        self.components: dict[tuple[int, ...], Callable] = {}
        for key, f in (components or {}).items():
            idx = () if degree == 0 and key in ("", (), None) else parse_key(key)
            if len(idx) != degree:
                raise ValueError(f"component {key!r} does not match degree {degree}")
            self.components[idx] = _as_callable(f)

    # construction ---------------------------------------------------------
    @classmethod
    def scalar(cls, f) -> "FormField":
        return cls(0, {(): f})

    @classmethod
    def from_json(cls, data: dict) -> "FormField":
        return cls(int(data["degree"]),
                   {k: Polynomial.from_json(v) for k, v in data["components"].items()})

    def to_json(self) -> dict:
        if not self.is_polynomial:
            raise ValueError("only polynomial fields serialize")
        return {"degree": self.degree,
                "components": {key_name(k): f.to_json() for k, f in sorted(self.components.items())}}

    # access ---------------------------------------------------------------
    def __getitem__(self, key) -> Callable:
        idx = () if key in ("", ()) else parse_key(key)
        return self.components.get(idx, _zero)

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(f, Polynomial) for f in self.components.values())

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Components at points (N, 3), columns in ``basis(degree)`` order."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((len(P), len(basis(self.degree))))
        for col, idx in enumerate(basis(self.degree)):
            if idx in self.components:
                out[:, col] = self.components[idx](P[:, 0], P[:, 1], P[:, 2])
        return out

    # algebra --------------------------------------------------------------
    def __add__(self, other: "FormField") -> "FormField":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        comps = dict(self.components)
        for k, f in other.components.items():
            comps[k] = _sum(comps[k], f) if k in comps else f
        return FormField(self.degree, comps)

    def __neg__(self):
        return FormField(self.degree, {k: _scaled(f, -1.0) for k, f in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a: float):
        return FormField(self.degree, {k: _scaled(f, float(a)) for k, f in self.components.items()})

    __rmul__ = __mul__

    def wedge(self, other: "FormField") -> "FormField":
        if self.degree + other.degree > 3:
            return FormField(3, {})
        comps = {}
        for I, f in self.components.items():
            for J, g in other.components.items():
                if set(I) & set(J):
                    continue
                K = tuple(sorted(I + J))
                term = _product(f, g)
                if _perm_sign(I + J) < 0:
                    term = _scaled(term, -1.0)
                comps[K] = _sum(comps[K], term) if K in comps else term
        return FormField(self.degree + other.degree, comps)

    def interior(self, vector) -> "FormField":
        """Contraction with a vector field given as three component callables or numbers."""
        if self.degree == 0:
            raise ValueError("cannot contract a 0-form")
        V = [_as_callable(v) for v in vector]
        comps = {}
        for I, f in self.components.items():
            for pos, i in enumerate(I):
                rest = I[:pos] + I[pos + 1:]
                term = _product(V[i], f)
                if pos % 2:
                    term = _scaled(term, -1.0)
                comps[rest] = _sum(comps[rest], term) if rest in comps else term
        return FormField(self.degree - 1, comps)

    def vertical(self) -> "FormField":
        """Restriction to vertical (dt = 0) vectors: drop every dt component."""
        return FormField(self.degree, {k: f for k, f in self.components.items() if 0 not in k})

    def d(self) -> "FormField":
        """Exact exterior derivative of a polynomial field."""
        if not self.is_polynomial:
            raise ValueError("exact d needs polynomial components; use exterior_derivative(F, h)")
        if self.degree == 3:
            raise ValueError("the exterior derivative of a top-degree form is out of range")
        comps = {}
        for I, f in self.components.items():
            for j in range(3):
                if j in I:
                    continue
                sign = -1.0 if sum(1 for i in I if i < j) % 2 else 1.0
                K = tuple(sorted(I + (j,)))
                term = sign * f.deriv(j)
                comps[K] = comps[K] + term if K in comps else term
        return FormField(self.degree + 1, comps)

    def __repr__(self):
        return f"FormField(degree={self.degree}, components={[key_name(k) for k in self.components]})"


def central_partial(f: Callable, j: int, h: float) -> Callable:
    """Central difference of f along coordinate j."""
    def df(t, x1, x2):
        args = [np.asarray(t, float), np.asarray(x1, float), np.asarray(x2, float)]
        up = list(args)
        dn = list(args)
        up[j] = args[j] + h
        dn[j] = args[j] - h
        return (f(*up) - f(*dn)) / (2.0 * h)
    return df


def exterior_derivative(F: FormField, h: float = 1e-4) -> FormField:
    """Exterior derivative by second-order central differences of width h."""
    if F.degree == 3:
        raise ValueError("the exterior derivative of a top-degree form is out of range")
    if h <= 0:
        raise ValueError("stencil width must be positive")
    comps = {}
    for I, f in F.components.items():
        for j in range(3):
            if j in I:
                continue
            sign = -1.0 if sum(1 for i in I if i < j) % 2 else 1.0
            K = tuple(sorted(I + (j,)))
            term = _scaled(central_partial(f, j, h), sign)
            comps[K] = _sum(comps[K], term) if K in comps else term
    return FormField(F.degree + 1, comps)


DT = FormField(1, {"t": 1.0})
DX1 = FormField(1, {"1": 1.0})
DX2 = FormField(1, {"2": 1.0})
VOLUME = FormField(3, {"t12": 1.0})
