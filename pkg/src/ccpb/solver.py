"""Relaxed fixed-point ("convex iteration") solver for the CCPB and PB problems.

Each step solves the linear problem eps^2 u'' = g(phi_m) with the Robin
data, then blends ``phi_{m+1} = s u + (1 - s) phi_m``. For CCPB the source
``g`` carries the nonlocal normalisations int exp(q phi); for PB they are
replaced by the constant 2.

Iteration stops when sup|u - phi_m| <= tol. This equals
|phi_{m+1} - phi_m| / s, so at small s it measures the undamped step.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field as dc_field, replace
from typing import Literal

import numpy as np

from . import _kernels
from .grid import (Field, Grid, assemble_step_problem, solve_tridiagonal,
                   step_matrix)
from .ions import EXP_CAP, BoundaryData, IonSystem, check_exponent, f_eval

log = logging.getLogger(__name__)

Model = Literal["ccpb", "pb"]


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    relax_s: float | None = None
    relax_C: float = 0.5
    tol: float = 1e-6
    max_iter: int = 2_000_000
    init: str = "linear"
    chunk: int = 50_000

    def __post_init__(self):
        if self.relax_s is not None and not 0.0 < self.relax_s < 1.0:
            raise ValueError("relax_s must lie in (0, 1)")
        if not 0.0 < self.relax_C < 1.0:
            raise ValueError("relax_C must lie in (0, 1)")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.init not in ("zero", "linear"):
            raise ValueError(f"unknown init {self.init!r}")

    def s_for(self, eps: float) -> float:
        if self.relax_s is not None:
            return self.relax_s
        return float(np.clip(self.relax_C * eps * eps, 1e-6, 0.9))


@dataclass
class SolveReport:
    field: Field
    iterations: int
    final_delta_sup: float
    residual_integrals: np.ndarray
    first_integral_constant: float
    converged: bool
    model: str = "ccpb"
    eps: float = float("nan")
    s: float = float("nan")
    message: str = ""
    extra: dict = dc_field(default_factory=dict)

    @property
    def phi(self) -> np.ndarray:
        return self.field.values


def _check_model(model: str) -> None:
    if model not in ("ccpb", "pb"):
        raise ValueError(f"model must be 'ccpb' or 'pb', got {model!r}")


def boltzmann_terms(field: Field, sys: IonSystem, model: Model = "ccpb",
                    cap: float = EXP_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Per-species normalised Boltzmann factors e^{q phi}/norm and the q array."""
    q, m = sys.signed()
    arg = np.multiply.outer(field.values, q)
    check_exponent(arg, cap)
    e = np.exp(arg)
    norm = np.full(q.shape, 2.0) if model == "pb" else field.grid.weights @ e
    return e / norm, q


def ccpb_rhs(field: Field, sys: IonSystem) -> np.ndarray:
    e, q = boltzmann_terms(field, sys, "ccpb")
    return e @ (q * sys.signed()[1])


def pb_rhs(field: Field, sys: IonSystem) -> np.ndarray:
    e, q = boltzmann_terms(field, sys, "pb")
    return e @ (q * sys.signed()[1])


def rhs(field: Field, sys: IonSystem, model: Model) -> np.ndarray:
    _check_model(model)
    return ccpb_rhs(field, sys) if model == "ccpb" else pb_rhs(field, sys)


def residual_integral(field: Field, sys: IonSystem, bd: BoundaryData, eps: float,
                      model: Model) -> float:
    """Discrete integral of g(phi) - eps^2 phi'' over the non-Dirichlet rows."""
    sub, diag, sup, bc, free = step_matrix(field.grid, eps, bd)
    g = rhs(field, sys, model)
    u = field.values
    a_u = diag * u
    a_u[1:] += sub * u[:-1]
    a_u[:-1] += sup * u[1:]
    r = a_u - (bc - field.grid.weights * g)
    return float(np.sum(r[free]))


def convex_step(field: Field, sys: IonSystem, bd: BoundaryData, eps: float,
                cfg: SolverConfig, model: Model = "ccpb") -> Field:
    """One relaxed step, assembled and solved through the public grid API."""
    s = cfg.s_for(eps)
    system = assemble_step_problem(field.grid, eps, bd, rhs(field, sys, model))
    half = solve_tridiagonal(system)
    return Field(field.grid, s * half + (1.0 - s) * field.values)


def initial_field(grid: Grid, bd: BoundaryData, init: str) -> Field:
    if init == "zero":
        return Field(grid, np.zeros(grid.n))
    x = grid.nodes
    return Field(grid, bd.phi_minus + (bd.phi_plus - bd.phi_minus) * (x + 1.0) / 2.0)


def first_integral(field: Field, sys: IonSystem, eps: float, model: Model = "ccpb") -> np.ndarray:
    """Nodal (eps^2/2) phi'^2 minus the Boltzmann terms; constant for an exact solution."""
    dphi = field.derivative()
    if model == "pb":
        boltz = 0.5 * f_eval(sys, field.values)
    else:
        e, _ = boltzmann_terms(field, sys, "ccpb")
        boltz = e @ sys.signed()[1]
    return 0.5 * eps * eps * dphi * dphi - boltz


def solve(sys: IonSystem, bd: BoundaryData, eps: float, grid: Grid,
          cfg: SolverConfig | None = None, model: Model = "ccpb",
          initial: Field | np.ndarray | None = None) -> SolveReport:
    """Iterate the relaxed scheme until ||(phi_{m+1}-phi_m)/s||_inf <= tol."""
    cfg = cfg or SolverConfig()
    _check_model(model)
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    s = cfg.s_for(eps)
    if initial is None:
        phi = initial_field(grid, bd, cfg.init).values.copy()
    else:
        phi = np.array(getattr(initial, "values", initial), dtype=float)
    sub, diag, sup, bc, free = step_matrix(grid, eps, bd)
    q, m = sys.signed()
    w = grid.weights
    guard = 10.0 * (abs(bd.phi_plus) + abs(bd.phi_minus) + 10.0)

    hist: list[np.ndarray] = []
    done, converged, delta, message = 0, False, np.inf, ""
    while done < cfg.max_iter:
        n_steps = min(cfg.chunk, cfg.max_iter - done)
        n, converged, delta, h, code = _kernels.relax(
            phi, w, sub, diag, sup, bc, free, s, cfg.tol, n_steps, q, m,
            model == "pb", EXP_CAP)
        done += n
        hist.append(np.array(h))
        if code != _kernels.OK:
            message = {_kernels.ZERO_PIVOT: "zero pivot in step matrix",
                       _kernels.OVERFLOW: "Boltzmann exponent overflow",
                       _kernels.NONFINITE: "non-finite iterate"}[code]
            break
        if np.max(np.abs(phi)) > guard:
            message = f"divergence guard: max|phi| = {np.max(np.abs(phi)):.3g} > {guard:.3g}"
            break
        if converged:
            break
        log.debug("%s eps=%g: %d iterations, delta=%.3e", model, eps, done, delta)
    if not converged and not message:
        message = f"no convergence after {done} iterations (delta={delta:.3e})"

    out = Field(grid, phi) if np.all(np.isfinite(phi)) else Field(grid, np.zeros(grid.n))
    c_eps = float("nan")
    if converged:
        fi = first_integral(out, sys, eps, model)
        c_eps = float(np.median(fi[1:-1]))
    return SolveReport(out, done, float(delta), np.concatenate(hist) if hist else np.empty(0),
                       c_eps, bool(converged), model, eps, s, message)


def uniqueness_probe(sys: IonSystem, bd: BoundaryData, eps: float, grid: Grid,
                     cfg: SolverConfig | None = None, model: Model = "ccpb",
                     n_starts: int = 4, seed: int = 0) -> float:
    """Largest sup-distance between solutions reached from different starts."""
    if n_starts < 2:
        raise ValueError("need at least two starts")
    cfg = cfg or SolverConfig()
    amp = max(abs(bd.phi_plus), abs(bd.phi_minus), 0.5)
    rng = np.random.default_rng(seed)
    starts = [
        np.zeros(grid.n),
        initial_field(grid, bd, "linear").values,
        np.full(grid.n, 0.5),
        np.full(grid.n, -0.5),
        rng.uniform(-amp, amp, grid.n),
    ]
    fields = []
    for k, start in enumerate(starts[:n_starts]):
        rep = solve(sys, bd, eps, grid, cfg, model, initial=start)
        if not rep.converged:
            raise ConvergenceError(f"start {k} did not converge: {rep.message}")
        fields.append(rep.phi)
    return max(float(np.max(np.abs(u - v))) for u, v in itertools.combinations(fields, 2))


def with_tol(cfg: SolverConfig, tol: float) -> SolverConfig:
    return replace(cfg, tol=tol)


def boundary_identity_residuals(rep: SolveReport, sys: IonSystem, bd: BoundaryData
                                ) -> tuple[float, float]:
    """Residuals of the two wall identities for an antisymmetric Robin solution.

    First: sum alpha (e^{a p} - e^{-a p})/I_a = sum beta (e^{b p} - e^{-b p})/I_{-b}
    with p = phi(1). Second (eta > 0 only, else nan): the first integral at
    x = 1 with phi'(1) taken from the Robin condition.
    """
    fld, eps = rep.field, rep.eps
    w = fld.grid.weights
    q, m = sys.signed()
    norm = w @ np.exp(np.multiply.outer(fld.values, q))
    p1 = fld.values[-1]
    na = len(sys.anions)
    two_sinh = np.exp(np.abs(q) * p1) - np.exp(-np.abs(q) * p1)
    terms = m * two_sinh / norm
    r1 = float(np.sum(terms[:na]) - np.sum(terms[na:]))
    if bd.eta == 0.0:
        return r1, float("nan")
    lhs = eps * eps / (2 * bd.eta ** 2) * (bd.phi_plus - p1) ** 2
    rhs_ = float(np.sum(m * np.exp(q * p1) / norm)) + rep.first_integral_constant
    return r1, float(lhs - rhs_)
