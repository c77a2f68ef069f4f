"""Zero-eps limit objects: the CCPB boundary/interior pair (t, c), the balance
root c*, the bracket constant c_*, the PB boundary limit t_hat, the
non-neutral PB interior level r, the Na/Ca ratio formulas and gamma sweeps.

Here gamma = lim eta/eps. Every scalar root is found by bisection first;
the (t, c) pair is then polished by a few clipped Newton steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import bisect

from .ions import IonSystem, f_minus_f0, f_prime

ROOT_XTOL = 1e-13
RESID_TOL = 1e-10
SLACK = 1e-10


@dataclass(frozen=True)
class LimitPair:
    gamma: float
    t: float
    c: float
    eq1_residual: float
    eq2_residual: float

    @property
    def t_minus_c(self) -> float:
        return self.t - self.c


@dataclass
class SweepTable:
    gamma: np.ndarray
    t: np.ndarray
    c: np.ndarray
    phi_plus: float = 1.0
    c_star: float = float("nan")
    monotone_t: bool = False
    monotone_tc: bool = False
    c_extrema: list = dc_field(default_factory=list)

    @property
    def t_minus_c(self) -> np.ndarray:
        return self.t - self.c

    @property
    def rows(self) -> np.ndarray:
        return np.column_stack([self.gamma, self.t, self.c, self.t_minus_c])


def _require_neutral(sys: IonSystem) -> None:
    if not sys.electroneutral:
        raise ValueError("species must be electroneutral (sum a*alpha = sum b*beta)")


def _root(fun, lo: float, hi: float) -> float:
    flo, fhi = fun(lo), fun(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change on [{lo:g}, {hi:g}]")
    # relative tolerance keeps tiny roots (huge gamma) accurate too
    xtol = min(ROOT_XTOL, 1e-3 * (hi - lo))
    return float(bisect(fun, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))


def tc_residuals(sys: IonSystem, phi_plus: float, gamma: float, t: float, c: float):
    """Residuals of phi+ - t = gamma sqrt(f(t-c)-f(0)) and f(t-c) = f(-t-c)."""
    r1 = phi_plus - t - gamma * np.sqrt(max(f_minus_f0(sys, t - c), 0.0))
    r2 = f_minus_f0(sys, t - c) - f_minus_f0(sys, -t - c)
    return float(r1), float(r2)


def c_star_neutral(sys: IonSystem, phi_plus: float) -> float:
    """Root c* in (-phi+, phi+) of f(phi+ - c) = f(-phi+ - c)."""
    _require_neutral(sys)
    if not phi_plus > 0.0:
        raise ValueError("phi_plus must be positive")
    return _root(lambda c: f_minus_f0(sys, phi_plus - c) - f_minus_f0(sys, -phi_plus - c),
                 -phi_plus, phi_plus)


def _newton_polish(sys, phi_plus, gamma, t, c, steps=20):
    r = np.array(tc_residuals(sys, phi_plus, gamma, t, c))
    for _ in range(steps):
        if np.max(np.abs(r)) <= 1e-15:
            break
        u, w = t - c, -t - c
        fm = max(f_minus_f0(sys, u), 1e-300)
        fu, fw = f_prime(sys, u), f_prime(sys, w)
        g = gamma * fu / (2.0 * np.sqrt(fm))
        jac = np.array([[-1.0 - g, g], [fu + fw, -fu + fw]])
        try:
            dt, dc = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            tn, cn = t + lam * dt, c + lam * dc
            if abs(cn) < tn <= phi_plus:
                rn = np.array(tc_residuals(sys, phi_plus, gamma, tn, cn))
                if np.max(np.abs(rn)) < np.max(np.abs(r)):
                    break
            lam *= 0.5
        else:
            break
        t, c, r = tn, cn, rn
    return t, c


def solve_tc(sys: IonSystem, phi_plus: float, gamma: float) -> LimitPair:
    """Unique (t, c) with |c| < t <= phi+ solving the two limit equations."""
    _require_neutral(sys)
    if not phi_plus > 0.0:
        raise ValueError("phi_plus must be positive")
    if not gamma >= 0.0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0.0:
        t, c = float(phi_plus), c_star_neutral(sys, phi_plus)
    else:
        def k(s):
            return s - 2.0 * phi_plus + 2.0 * gamma * np.sqrt(f_minus_f0(sys, s))

        s1 = _root(k, 0.0, 2.0 * phi_plus)
        s2 = _root(lambda s: f_minus_f0(sys, s) - f_minus_f0(sys, k(s)), 0.0, s1)
        t = phi_plus - gamma * np.sqrt(f_minus_f0(sys, s2))
        c = t - s2
        t, c = _newton_polish(sys, phi_plus, gamma, t, c)
    r1, r2 = tc_residuals(sys, phi_plus, gamma, t, c)
    if max(abs(r1), abs(r2)) > RESID_TOL:
        raise ArithmeticError(f"limit system residuals too large at gamma={gamma:g}: {r1:.2e}, {r2:.2e}")
    return LimitPair(float(gamma), float(t), float(c), r1, r2)


def c_star_bracket(t: float) -> float:
    """(1/3) log sech t, the lower bracket for c in the (1; 1, 2) valence pattern."""
    if not t > 0.0:
        raise ValueError("t must be positive")
    log_cosh = np.logaddexp(t, -t) - np.log(2.0)
    return float(-log_cosh / 3.0)


def ratio_ca1(t: float, c: float) -> float:
    """beta1/beta2 implied by (t, c) when a = (1) and b = (1, 2)."""
    if not t > 0.0:
        raise ValueError("t must be positive")
    if c == 0.0:
        raise ZeroDivisionError("ratio is singular at c = 0")
    return float((1.0 - np.exp(3.0 * c) * np.cosh(t)) / (np.exp(c) * np.sinh(c)))


def ratio_ca2(t: float, c: float, z: float) -> float:
    """beta1/beta_z implied by (t, c) when a = (1) and b = (1, z)."""
    if z < 2.0:
        raise ValueError("z must be >= 2")
    if not t > 0.0 or np.sinh(t) == 0.0:
        raise ZeroDivisionError("sinh t vanishes")
    if c == 0.0:
        raise ZeroDivisionError("ratio is singular at c = 0")
    num = z - np.exp((1.0 + z) * c) * np.sinh(z * t) / np.sinh(t)
    return float(num / (2.0 * np.exp(c) * np.sinh(c)))


def pb_t_hat(sys: IonSystem, phi_plus: float, gamma: float) -> float:
    """PB boundary limit: |phi+ - t| = gamma sqrt(f(t) - f(0)), t between 0 and phi+."""
    _require_neutral(sys)
    if not gamma >= 0.0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0.0 or phi_plus == 0.0:
        return float(phi_plus)
    lo, hi = sorted((0.0, float(phi_plus)))
    return _root(lambda t: abs(phi_plus - t) - gamma * np.sqrt(f_minus_f0(sys, t)), lo, hi)


def pb_nonneutral_r(sys: IonSystem) -> float:
    """Unique root of f' (f is strictly convex)."""
    if abs(f_prime(sys, 0.0)) == 0.0:
        return 0.0
    zmax = float(max(sys.a.max(), sys.b.max()))
    width = 1.0
    while f_prime(sys, -width) * f_prime(sys, width) > 0.0:
        width *= 2.0
        if width * zmax > 700.0:
            raise ArithmeticError("could not bracket the root of f'")
    return _root(lambda s: f_prime(sys, s), -width, width)


def _extrema(c: np.ndarray, slack: float = SLACK) -> list[int]:
    d = np.diff(c)
    sgn = np.where(d > slack, 1, np.where(d < -slack, -1, 0))
    idx = np.flatnonzero(sgn)
    out = []
    for j, k in zip(idx[:-1], idx[1:]):
        if sgn[j] != sgn[k]:
            out.append(int(k))
    return out


def gamma_sweep(sys: IonSystem, phi_plus: float, gammas) -> SweepTable:
    g = np.asarray(gammas, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("need at least two gamma values")
    if np.any(g < 0) or np.any(np.diff(g) <= 0):
        raise ValueError("gammas must be nonnegative and strictly increasing")
    t = np.empty(g.size)
    c = np.empty(g.size)
    for i, gi in enumerate(g):
        try:
            p = solve_tc(sys, phi_plus, gi)
        except Exception as exc:
            raise type(exc)(f"gamma={gi:g}: {exc}") from exc
        t[i], c[i] = p.t, p.c
    return SweepTable(
        gamma=g, t=t, c=c, phi_plus=float(phi_plus),
        c_star=c_star_neutral(sys, phi_plus),
        monotone_t=bool(np.all(np.diff(t) <= SLACK)),
        monotone_tc=bool(np.all(np.diff(t - c) <= SLACK)),
        c_extrema=_extrema(c),
    )


def default_gammas(n: int = 200, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)
