"""Currents carried by spacetime regions.

For a flux 2-form F and a region R (a tetrahedral 3-chain), the current
T(psi) = integral over R of F ^ psi acts on 1-forms. Its boundary acts on
functions, dT(phi) = T(d phi). By Stokes, since F ^ d phi = d(phi F) - phi dF,

    dT(phi) = integral over dR of phi F  -  integral over R of phi dF

(boundary part + volume part). When F is closed only the boundary part
survives: the source is carried by the boundary of the region.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flatgrowth.spacetime.forms import FormField, basis, exterior_derivative
from flatgrowth.spacetime.mesh import TetMesh, integrate_form
from flatgrowth.spacetime.polynomial import Polynomial, cube_bump

DEFAULT_ORDER = 2  # Grundmann-Moeller parameter s: exact to degree 5


@dataclass
class ChainCurrent:
    carrier: TetMesh
    integrand: FormField

    def __post_init__(self):
        if self.integrand.degree != 2:
            raise ValueError("the flux integrand must be a 2-form")


def _d(F: FormField, h: float) -> FormField:
    return F.d() if F.is_polynomial else exterior_derivative(F, h)


def current_apply(T: ChainCurrent, psi: FormField, order: int = DEFAULT_ORDER) -> float:
    """T(psi) by per-tetrahedron quadrature."""
    if psi.degree != 1:
        raise ValueError("the current acts on 1-forms")
    return integrate_form(T.integrand.wedge(psi), T.carrier.simplices, order)


@dataclass
class SourceReport:
    total: float
    boundary_part: float
    volume_part: float
    stokes_error: float
    quadrature_error: float
    difference_error: float = 0.0

    @property
    def error_estimate(self) -> float:
        """Combined estimate of the numerical error in the Stokes comparison."""
        return self.quadrature_error + self.difference_error


def source_current(T: ChainCurrent, phi: FormField, order: int = DEFAULT_ORDER,
                   h: float = 1e-4) -> SourceReport:
    """dT(phi) three ways: directly as T(d phi), and as the boundary and
    interior integrals. The quadrature error estimate compares the direct
    value at ``order`` and ``order + 2``. When dF has to be differenced, the
    difference error compares the interior part at stencil widths h and 2h
    (the stencil is second order, so the error at h is about a third of that).
    """
    if phi.degree != 0:
        raise ValueError("the source current acts on functions")
    F = T.integrand
    total = current_apply(T, _d(phi, h), order)
    total_hi = current_apply(T, _d(phi, h), order + 2)
    bnd = integrate_form(phi.wedge(F), T.carrier.boundary_simplices(), order)
    dF = _d(F, h)
    vol = -integrate_form(phi.wedge(dF), T.carrier.simplices, order) if dF.components else 0.0
    diff_err = 0.0
    if not F.is_polynomial:
        vol_2h = -integrate_form(phi.wedge(_d(F, 2 * h)), T.carrier.simplices, order)
        diff_err = abs(vol - vol_2h) / 3.0
    return SourceReport(total, bnd, vol, abs(total - (bnd + vol)), abs(total - total_hi), diff_err)


# ---------------------------------------------------------------------------
# boundary of currents given by forms

@dataclass
class IdentityReport:
    lhs: np.ndarray
    rhs: np.ndarray
    max_discrepancy: float
    sign: int


def form_current(phi: FormField, omega: FormField, mesh: TetMesh, order: int) -> float:
    """T_phi(omega) = integral over the region of phi ^ omega."""
    return integrate_form(phi.wedge(omega), mesh.simplices, order)


def probe_forms(degree: int) -> list[FormField]:
    """Polynomial test forms of the given degree: low-order monomials times each basis form."""
    T, X1, X2 = (Polynomial.coordinate(i) for i in range(3))
    monos = [Polynomial.constant(1.0), T, X1, X2, T * X1 + X2 ** 2, 1 + T * X1 * X2]
    out = []
    for idx in basis(degree):
        for m in monos:
            out.append(FormField(degree, {idx: m}))
    return out


def current_boundary_identity_check(phi: FormField, mesh: TetMesh, omegas=None,
                                    order: int = 9, h: float = 1e-4) -> IdentityReport:
    """Compare dT_phi(omega) = T_phi(d omega) with (-1)**(n-r-1) T_{d phi}(omega)
    for phi supported inside the region (n = 3, r = n - deg phi)."""
    n = 3
    r = n - phi.degree
    sign = (-1) ** (n - r - 1)
    if omegas is None:
        omegas = probe_forms(n - phi.degree - 1)
    dphi = _d(phi, h)
    lhs, rhs = [], []
    for om in omegas:
        lhs.append(form_current(phi, _d(om, h), mesh, order))
        rhs.append(sign * form_current(dphi, om, mesh, order))
    lhs, rhs = np.array(lhs), np.array(rhs)
    return IdentityReport(lhs, rhs, float(np.max(np.abs(lhs - rhs))) if len(lhs) else 0.0, sign)


def bump_forms() -> list[FormField]:
    """Forms of degree 0, 1, 2 with polynomial-bump factors vanishing on the unit cube's boundary."""
    T, X1, X2 = (Polynomial.coordinate(i) for i in range(3))
    b = cube_bump()
    return [
        FormField(0, {"": b * (1 + T + X1 * X2)}),
        FormField(1, {"t": b * X1, "1": b * (T - X2), "2": b * (1 + X1 ** 2)}),
        FormField(2, {"12": b * (2 + T), "t1": b * X2, "t2": -b * T * X1}),
    ]
