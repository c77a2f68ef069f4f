"""The ``ccpb verify`` suite: table reproduction plus structural and invariant checks.

Each check returns one or more CheckResult values. Advisory checks are
reported but never change the exit status.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from .asymptotics import (CheckResult, envelope_b2, gradient_bound_check, pb_decay_check,
                          sandwich_check)
from .energy import ccpb_energy
from .grid import Field, make_uniform
from .ions import BoundaryData, IonSystem
from .limits import c_star_bracket, ratio_ca1, solve_tc
from .presets import MAIN, TABLE2, get_preset
from .solver import SolverConfig, boundary_identity_residuals, solve, uniqueness_probe

TOL = 1e-6


def load_golden(path: str | None = None) -> dict:
    if path is None:
        text = resources.files("ccpb").joinpath("data/golden.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


class Context:
    """Caches converged solves shared between checks."""

    def __init__(self, golden: dict):
        self.golden = golden
        self._cache: dict = {}

    def solve(self, preset: str, eps: float, model: str = "ccpb", label: str = "main"):
        key = (preset, eps, model, label)
        if key not in self._cache:
            cfg = get_preset(preset)
            blk = next(s for s in cfg.species if s.label == label)
            rep = solve(blk.system(), cfg.boundary(eps), eps, cfg.grid.build(eps),
                        cfg.solver.build(), model)
            if not rep.converged:
                raise RuntimeError(f"{preset}/{model}/eps={eps:g} did not converge: {rep.message}")
            self._cache[key] = rep
        return self._cache[key]


@dataclass(frozen=True)
class Check:
    name: str
    fn: Callable
    advisory: bool = False
    doc: str = ""


CHECKS: list[Check] = []


def check(name: str, advisory: bool = False):
    def deco(fn):
        CHECKS.append(Check(name, fn, advisory, (fn.__doc__ or "").strip().splitlines()[0]))
        return fn
    return deco


@check("table1-ccpb")
def _table1_ccpb(ctx):
    """CCPB phi(0) for presets I and II against the Table 1 values."""
    g = ctx.golden["table1"]
    out = []
    for tag, vals in g["ccpb"].items():
        for eps_s, ref in vals.items():
            rep = ctx.solve(f"fig2-{tag}", float(eps_s))
            out.append(CheckResult(f"table1 ccpb {tag} eps={eps_s}", rep.field.at(0.0), ref, g["tol"]))
    return out


@check("table1-pb")
def _table1_pb(ctx):
    """PB phi(0): tabulated value at eps = 1/2, near zero at eps = 2^-3, 2^-5."""
    g = ctx.golden["table1"]
    out = []
    for tag, vals in g["pb"].items():
        for eps_s, ref in vals.items():
            rep = ctx.solve(f"fig2-{tag}", float(eps_s), "pb")
            out.append(CheckResult(f"table1 pb {tag} eps={eps_s}", rep.field.at(0.0), ref, g["tol"]))
        for eps in (2.0 ** -3, 2.0 ** -5):
            rep = ctx.solve(f"fig2-{tag}", eps, "pb")
            out.append(CheckResult(f"table1 pb {tag} eps={eps:g}", rep.field.at(0.0), 0.0,
                                   g["pb_zero_tol"]))
    return out


@check("table2-limits")
def _table2(ctx):
    """Limit pair (t, c) and c_* against Table 2."""
    g = ctx.golden["table2"]
    systems = {b.label: b.system() for b in TABLE2}
    out = []
    for row in g["rows"]:
        p = solve_tc(systems[row["species"]], 1.0, row["gamma"])
        tag = f"{row['species']} gamma={row['gamma']:g}"
        out.append(CheckResult(f"table2 t {tag}", p.t, row["t"], g["tol"]))
        out.append(CheckResult(f"table2 c {tag}", p.c, row["c"], g["tol"]))
        out.append(CheckResult(f"table2 c_* {tag}", c_star_bracket(p.t), row["c_star_bracket"], g["tol"]))
    return out


@check("ratio-formula")
def _ratio(ctx):
    """beta1/beta2 recovered from tabulated (t, c) by the Na/Ca ratio formula."""
    g = ctx.golden["table2"]
    return [CheckResult(f"ratio {r['species']} gamma={r['gamma']:g}", ratio_ca1(r["t"], r["c"]),
                        r["ratio"], g["ratio_tol"]) for r in g["rows"]]


@check("solver-vs-limits")
def _consistency(ctx):
    """phi(0) near c and phi(1) near t at eps = 2^-5, gamma = lim eta/eps."""
    out = []
    eps = 2.0 ** -5
    for tag in ("I", "II"):
        cfg = get_preset(f"fig2-{tag}")
        pair = solve_tc(MAIN.system(), cfg.phi_plus, cfg.eta_rule.gamma_limit())
        rep = ctx.solve(f"fig2-{tag}", eps)
        out.append(CheckResult(f"|phi(0)-c| {tag}", rep.field.at(0.0), pair.c, 0.01))
        out.append(CheckResult(f"|phi(1)-t| {tag}", rep.phi[-1], pair.t, 0.05))
    return out


@check("first-integral")
def _first_integral(ctx):
    """C_eps approaches -(sum alpha + sum beta)/2 and the wall identities hold."""
    rep = ctx.solve("fig2-I", 2.0 ** -5)
    bd = get_preset("fig2-I").boundary(2.0 ** -5)
    r1, r2 = boundary_identity_residuals(rep, MAIN.system(), bd)
    return [CheckResult("C_eps preset I eps=2^-5", rep.first_integral_constant,
                        -MAIN.system().total / 2, 0.05),
            CheckResult("wall identity (antisymmetric)", r1, 0.0, 1e-2),
            CheckResult("wall identity (Robin)", r2, 0.0, 1e-2)]


@check("structure")
def _structure(ctx):
    """Monotone, antisymmetric, one concave-to-convex switch, bounded by phi0+."""
    out = []
    for eps in (2.0 ** -3, 2.0 ** -5):
        rep = ctx.solve("fig2-I", eps)
        u = rep.phi
        d2 = rep.field.second_difference()
        sig = np.sign(d2[np.abs(d2) > 1e-6 * np.abs(d2).max()])
        out += [CheckResult(f"min diff eps={eps:g}", min(np.diff(u).min(), 0.0), 0.0, 1e-6),
                CheckResult(f"phi(-1)+phi(1) eps={eps:g}", u[0] + u[-1], 0.0, 1e-6),
                CheckResult(f"second-difference sign changes eps={eps:g}",
                            float(np.sum(sig[1:] != sig[:-1])), 1.0, 0.0),
                CheckResult(f"max|phi| - phi0+ eps={eps:g}", max(np.abs(u).max() - 1.0, 0.0), 0.0, 1e-9)]
    return out


@check("residual-contraction")
def _contraction(ctx):
    """Residual integral shrinks by exactly (1 - s) per step (Robin data, shifted start)."""
    eps = 2.0 ** -3
    cfg = get_preset("fig2-I")
    grid = cfg.grid.build(eps)
    rep = solve(MAIN.system(), cfg.boundary(eps), eps, grid, SolverConfig(max_iter=10),
                initial=np.full(grid.n, 0.5))
    h = rep.residual_integrals
    dev = np.max(np.abs(h[1:] / h[:-1] / (1 - rep.s) - 1))
    return [CheckResult("contraction deviation", float(dev), 0.0, 0.05)]


@check("energy-shift")
def _energy_shift(ctx):
    """CCPB energy is unchanged by u -> u + C, phi0 -> phi0 + C."""
    sys_ = MAIN.system()
    grid = make_uniform(64)
    u = Field(grid, np.sin(2 * grid.nodes) + 0.1 * grid.nodes ** 2)
    bd = BoundaryData(1.0, -1.0, 0.5)
    e0 = ccpb_energy(sys_, bd, 0.5, u)
    e1 = ccpb_energy(sys_, BoundaryData(1.7, -0.3, 0.5), 0.5, Field(grid, u.values + 0.7))
    return [CheckResult("energy shift invariance", e1 - e0, 0.0, 1e-12)]


@check("uniqueness")
def _uniqueness(ctx):
    """Four starting fields converge to the same solution."""
    eps = 2.0 ** -3
    cfg = get_preset("fig2-I")
    d = uniqueness_probe(MAIN.system(), cfg.boundary(eps), eps, cfg.grid.build(eps), n_starts=4)
    return [CheckResult("uniqueness distance", d, 0.0, 10 * TOL)]


@check("gradient-bound")
def _gradient(ctx):
    """0 <= phi' <= phi'(1)(e^{-M1(1+x)/eps} + e^{-M1(1-x)/eps}); PB decay analog."""
    eps = 2.0 ** -5
    bd = get_preset("fig2-I").boundary(eps)
    return [gradient_bound_check(ctx.solve("fig2-I", eps).field, MAIN.system(), bd, eps),
            pb_decay_check(ctx.solve("fig2-I", eps, "pb").field, MAIN.system(), bd, eps)]


@check("envelope-interior")
def _envelope(ctx):
    """Limiting envelopes hit +-t at the walls and equal c deep inside."""
    pair = solve_tc(MAIN.system(), 1.0, 0.0)
    eps = 2.0 ** -5
    args = (1.2, 0.4, pair.t, pair.c, eps)
    return [CheckResult("envelope plus at x=1", envelope_b2(*args, "plus", 1.0), pair.t, 1e-12),
            CheckResult("envelope minus at x=-1", envelope_b2(*args, "minus", -1.0), -pair.t, 1e-12),
            CheckResult("envelope interior", envelope_b2(*args, "plus", 0.0), pair.c, 1e-12)]


@check("sandwich", advisory=True)
def _sandwich(ctx):
    """Envelope sandwich at all layer nodes, preset I, eps = 2^-5."""
    eps = 2.0 ** -5
    pair = solve_tc(MAIN.system(), 1.0, 0.0)
    return [sandwich_check(ctx.solve("fig2-I", eps).field, pair, MAIN.system(), eps)]


def _mono(eps, eta, alpha=1.0, beta=1.0, phi=(1.0, -1.0), model="ccpb"):
    sys_ = IonSystem([(1, alpha)], [(1, beta)])
    bd = BoundaryData(phi[0], phi[1], eta)
    return solve(sys_, bd, eps, make_uniform(2048), model=model)


@check("appendix-a1", advisory=True)
def _a1(ctx):
    """eps/eta -> 0: interior tends to 0 while eta*phi'(1) stays of order one."""
    vals = []
    for eps in (2.0 ** -3, 2.0 ** -5):
        eta = 0.5 * np.sqrt(eps)
        rep = _mono(eps, eta)
        vals.append((abs(rep.field.at(0.0)), eta * rep.field.derivative()[-1]))
    ratio = vals[1][1] / vals[0][1]
    return [CheckResult("a1 |phi(0)| at eps=2^-5", vals[1][0], 0.0, 1e-3, advisory=True),
            CheckResult("a1 eta*phi'(1) ratio", ratio, 1.0, 0.5, advisory=True)]


@check("appendix-b2", advisory=True)
def _b2(ctx):
    """eta/eps^2 -> inf, non-neutral: phi(+-1) grows while phi(1)-phi(-1) stays 0."""
    reps = [_mono(eps, eps, 1.0, 2.0, (0.0, 0.0)) for eps in (2.0 ** -3, 2.0 ** -4)]
    grow = reps[1].phi[-1] - reps[0].phi[-1]
    return [CheckResult("b2 phi(1) growth", float(grow > 0), 1.0, 0.0, advisory=True),
            CheckResult("b2 |phi(1)-phi(-1)|", abs(reps[1].phi[-1] - reps[1].phi[0]), 0.0, 1e-6,
                        advisory=True)]


@check("appendix-c1", advisory=True)
def _c1(ctx):
    """alpha = beta: CCPB and PB solutions approach each other."""
    eps = 2.0 ** -5
    a = _mono(eps, 0.5 * eps * eps)
    b = _mono(eps, 0.5 * eps * eps, model="pb")
    return [CheckResult("c1 sup|CCPB-PB|", float(np.max(np.abs(a.phi - b.phi))), 0.0, 0.05,
                        advisory=True)]


def run(golden: dict, out=None, names=None) -> int:
    """Run the suite; exit status 0 iff every required check passes."""
    ctx = Context(golden)
    failed = []
    for chk in CHECKS:
        if names and chk.name not in names:
            continue
        t0 = time.perf_counter()
        try:
            results = chk.fn(ctx)
        except Exception as exc:  # a crashing check counts as a failure
            results = [CheckResult(chk.name, float("nan"), 0.0, 0.0, chk.advisory,
                                   detail=f"error: {exc}")]
        dt = time.perf_counter() - t0
        for r in results:
            if chk.advisory and not r.advisory:
                r = CheckResult(r.name, r.value, r.reference, r.tolerance, True, r.detail)
            if out is not None:
                print(f"[{chk.name}] {r.line()}", file=out)
            if not r.passed and not r.advisory:
                failed.append(f"{chk.name}: {r.name}")
        if out is not None:
            print(f"[{chk.name}] done in {dt:.1f}s", file=out)
    if out is not None:
        print("verify: " + ("all required checks passed" if not failed
                            else f"{len(failed)} failed: " + "; ".join(failed)), file=out)
    return 0 if not failed else 1
