"""Discrete energy functionals whose stationary points are the CCPB / PB solutions.

Integrals use the trapezoid rule on the field's grid and u' is the per-cell
difference quotient, so the gradient of each discrete energy is exactly the
residual of the corresponding P1 step problem.
"""
from __future__ import annotations

import numpy as np

from .grid import Field
from .ions import BoundaryData, IonSystem, check_exponent, f_eval


def _gradient_term(field: Field, eps: float) -> float:
    du = np.diff(field.values)
    return 0.5 * eps * eps * float(np.sum(du * du / field.grid.cells))


def _penalty(field: Field, bd: BoundaryData, eps: float, dirichlet: bool) -> float:
    u = field.values
    if bd.eta == 0.0:
        if not dirichlet:
            raise ValueError("eta = 0: the Robin penalty is undefined; pass dirichlet=True")
        if abs(u[0] - bd.phi_minus) > 1e-12 or abs(u[-1] - bd.phi_plus) > 1e-12:
            raise ValueError("Dirichlet energy requires u(-1) = phi-, u(1) = phi+")
        return 0.0
    return 0.5 * eps * eps / bd.eta * ((bd.phi_minus - u[0]) ** 2 + (bd.phi_plus - u[-1]) ** 2)


def ccpb_energy(sys: IonSystem, bd: BoundaryData, eps: float, field: Field,
                dirichlet: bool = False) -> float:
    w = field.grid.weights
    q, m = sys.signed()
    arg = np.multiply.outer(field.values, q)
    check_exponent(arg)
    logs = np.log(w @ np.exp(arg))
    return _gradient_term(field, eps) + float(m @ logs) + _penalty(field, bd, eps, dirichlet)


def pb_energy(sys: IonSystem, bd: BoundaryData, eps: float, field: Field,
              dirichlet: bool = False) -> float:
    bulk = 0.5 * float(field.grid.weights @ f_eval(sys, field.values))
    return _gradient_term(field, eps) + bulk + _penalty(field, bd, eps, dirichlet)
