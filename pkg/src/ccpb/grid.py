"""Meshes on [-1, 1], nodal fields, P1 assembly and tridiagonal solves."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .ions import EXP_CAP, BoundaryData, check_exponent


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    kind: str = "uniform"
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("a grid needs at least 3 nodes")
        if x[0] != -1.0 or x[-1] != 1.0:
            raise ValueError("grid must start at -1 and end at +1 exactly")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def cells(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid (lumped-mass) weights; they sum to 2."""
        h = self.cells
        w = np.zeros(self.n)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w

    def index_of(self, x: float) -> int:
        return int(np.argmin(np.abs(self.nodes - x)))


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("field length does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def at(self, x: float) -> float:
        return float(np.interp(x, self.grid.nodes, self.values))

    def derivative(self) -> np.ndarray:
        # central differences inside, one-sided (second order) at the ends
        return np.gradient(self.values, self.grid.nodes, edge_order=2)

    def second_difference(self) -> np.ndarray:
        """Nodal second derivative on interior nodes (non-uniform 3-point)."""
        x, u = self.grid.nodes, self.values
        hl = x[1:-1] - x[:-2]
        hr = x[2:] - x[1:-1]
        return 2.0 * (hr * u[:-2] - (hl + hr) * u[1:-1] + hl * u[2:]) / (hl * hr * (hl + hr))


@dataclass(frozen=True)
class TridiagonalSystem:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.rhs) != n or len(self.sub) != n - 1 or len(self.sup) != n - 1:
            raise ValueError("inconsistent tridiagonal shapes")

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[1:] += self.sub * u[:-1]
        out[:-1] += self.sup * u[1:]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)


def make_uniform(n_cells: int) -> Grid:
    if int(n_cells) != n_cells or n_cells < 2:
        raise ValueError(f"need n_cells >= 2, got {n_cells}")
    n_cells = int(n_cells)
    x = -1.0 + 2.0 * np.arange(n_cells + 1) / n_cells
    x[-1] = 1.0
    return Grid(x, "uniform", {"n_cells": n_cells})


def make_graded(min_cell: float, growth: float, interior_h: float) -> Grid:
    """Symmetric grid refined geometrically toward both endpoints.

    Boundary cells are ``min_cell * growth**k`` until the next one would reach
    ``interior_h``; the remaining middle stretch is split uniformly with
    spacing at most ``interior_h``.
    """
    if not (0.0 < min_cell <= interior_h) or not growth > 1.0 or interior_h >= 1.0:
        raise ValueError("need 0 < min_cell <= interior_h < 1 and growth > 1")
    graded = []
    h = min_cell
    while h < interior_h and 2.0 * (sum(graded) + h) < 2.0 - 2.0 * interior_h:
        graded.append(h)
        h *= growth
    side = float(np.sum(graded))
    middle = 2.0 - 2.0 * side
    m = max(2, int(np.ceil(middle / interior_h - 1e-9)))
    left = -1.0 + np.concatenate([[0.0], np.cumsum(graded)])
    inner = left[-1] + middle * np.arange(1, m) / m
    x = np.concatenate([left, inner, -left[::-1]])
    x[0], x[-1] = -1.0, 1.0
    return Grid(x, "graded", {"min_cell": min_cell, "growth": growth, "interior_h": interior_h})


def trapz_weighted_exp(field: Field, z: float, cap: float = EXP_CAP) -> float:
    """Trapezoid value of the integral of exp(z * phi) over [-1, 1]."""
    arg = z * field.values
    check_exponent(arg, cap)
    return float(field.grid.weights @ np.exp(arg))


def integrate(grid: Grid, y: np.ndarray, lo: float = -1.0, hi: float = 1.0) -> float:
    """Integral of the piecewise-linear interpolant of ``y`` over [lo, hi]."""
    x = grid.nodes
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])

    def prim(t):
        i = min(max(int(np.searchsorted(x, t, side="right")) - 1, 0), x.size - 2)
        dt = t - x[i]
        slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
        return cum[i] + y[i] * dt + 0.5 * slope * dt * dt

    return float(prim(hi) - prim(lo))


def stiffness(grid: Grid, eps: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = grid.cells
    k = eps * eps / h
    diag = np.zeros(grid.n)
    diag[:-1] += k
    diag[1:] += k
    return -k.copy(), diag, -k.copy()


def step_matrix(grid: Grid, eps: float, bd: BoundaryData):
    """Matrix, boundary part of the rhs and the mask of non-Dirichlet rows.

    The weak form is eps^2 (u', v') + (eps^2/eta)[(u(1)-phi+) v(1)
    + (u(-1)-phi-) v(-1)] + (g, v) = 0, written as A u = bc - w g.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    sub, diag, sup = stiffness(grid, eps)
    bc = np.zeros(grid.n)
    free = np.ones(grid.n, dtype=bool)
    if bd.dirichlet:
        diag[0] = diag[-1] = 1.0
        sup[0] = 0.0
        sub[-1] = 0.0
        bc[0], bc[-1] = bd.phi_minus, bd.phi_plus
        free[0] = free[-1] = False
    else:
        pen = eps * eps / bd.eta
        diag[0] += pen
        diag[-1] += pen
        bc[0], bc[-1] = pen * bd.phi_minus, pen * bd.phi_plus
    return sub, diag, sup, bc, free


def assemble_step_problem(grid: Grid, eps: float, bd: BoundaryData, g) -> TridiagonalSystem:
    """P1 system for eps^2 u'' = g with the Robin (or Dirichlet) data ``bd``.

    The load uses lumped (trapezoid) integration of the nodal values of g.
    """
    sub, diag, sup, bc, free = step_matrix(grid, eps, bd)
    g = np.broadcast_to(np.asarray(g, dtype=float), (grid.n,))
    rhs = np.where(free, bc - grid.weights * g, bc)
    return TridiagonalSystem(sub, diag, sup, rhs)


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm without pivoting; raises ZeroPivotError on a zero pivot."""
    sub = np.ascontiguousarray(system.sub, dtype=float)
    diag = np.ascontiguousarray(system.diag, dtype=float)
    sup = np.ascontiguousarray(system.sup, dtype=float)
    rhs = np.ascontiguousarray(system.rhs, dtype=float)
    cp, den, code = _kernels.thomas_factor(sub, diag, sup)
    if code == _kernels.ZERO_PIVOT:
        raise _kernels.ZeroPivotError("zero pivot in tridiagonal elimination")
    return _kernels.thomas_solve(sub, cp, den, rhs)


ZeroPivotError = _kernels.ZeroPivotError
