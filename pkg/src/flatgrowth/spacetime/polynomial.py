"""Polynomials in the chart coordinates (t, x1, x2) with exact derivatives."""
from __future__ import annotations

import numpy as np


class Polynomial:
    """Sum of coef * t**et * x1**e1 * x2**e2, stored as {(et, e1, e2): coef}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"bad exponent tuple {exps}")
            if c != 0:
                clean[exps] = clean.get(exps, 0.0) + float(c)
        self.terms = {e: c for e, c in clean.items() if c != 0.0}

    @classmethod
    def constant(cls, c: float) -> "Polynomial":
        return cls({(0, 0, 0): c})

    @classmethod
    def coordinate(cls, i: int) -> "Polynomial":
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1.0})

    @classmethod
    def from_json(cls, rows) -> "Polynomial":
        return cls({(r[1], r[2], r[3]): r[0] for r in rows})

    def to_json(self) -> list:
        return [[c, *e] for e, c in sorted(self.terms.items())]

    def __call__(self, t, x1, x2):
        t, x1, x2 = np.broadcast_arrays(np.asarray(t, float), np.asarray(x1, float), np.asarray(x2, float))
        out = np.zeros(t.shape)
        for (et, e1, e2), c in self.terms.items():
            out = out + c * t ** et * x1 ** e1 * x2 ** e2
        return out

    def deriv(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = out.get(tuple(ne), 0.0) + c * e[i]
        return Polynomial(out)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if np.isscalar(other):
            return Polynomial.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def __repr__(self):
        return f"Polynomial({self.terms})"


T = Polynomial.coordinate(0)
X1 = Polynomial.coordinate(1)
X2 = Polynomial.coordinate(2)


def cube_bump() -> Polynomial:
    """(t(1-t) x1(1-x1) x2(1-x2))**2: vanishes with its gradient on the unit cube's boundary."""
    return (T * (1 - T) * X1 * (1 - X1) * X2 * (1 - X2)) ** 2
