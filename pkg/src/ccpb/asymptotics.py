"""Boundary-layer envelopes and desk-scale checks of the asymptotic results.

In the (1; 1, 2) valence pattern with alpha1 = beta1 + 2 beta2, the layer
profile v = phi - c obeys eps^2 v'^2 = (1 - e^{-v})^2 (alpha1 e^v + beta2).
Its exact solutions through v(+-1) are

    plus side:  e^v = 1 + (1 + beta2/alpha1) csch^2(theta/2),  theta = R (1-x)/eps + log D
    minus side: e^v = 1 - (1 + beta2/alpha1) sech^2(theta/2),  theta = R (1+x)/eps + log D

with R = sqrt(alpha1 + beta2). The half argument is what makes these solve
the layer equation and hit v(+-1); see ``envelope_b2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Field, integrate
from .ions import BoundaryData, IonSystem, check_exponent, f_eval, f_minus_f0, f_prime
from .limits import LimitPair

NEUTRAL_ABS = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    reference: float
    tolerance: float
    advisory: bool = False
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(abs(self.value - self.reference) <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else ("WARN" if self.advisory else "FAIL")
        return (f"{tag} {self.name}: value={self.value:.6g} ref={self.reference:.6g} "
                f"tol={self.tolerance:.3g}{' ' + self.detail if self.detail else ''}")


@dataclass
class DiagnosticsReport:
    checks: list = dc_field(default_factory=list)
    extra: dict = dc_field(default_factory=dict)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        """True when every non-advisory check passes."""
        return all(c.passed for c in self.checks if not c.advisory)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


@dataclass(frozen=True)
class EnvelopeParams:
    A: float
    B: float
    C: float
    D: float
    side: str

    def __post_init__(self):
        if self.side not in ("plus", "minus"):
            raise ValueError("side must be 'plus' or 'minus'")
        if not (self.B > 0 and self.C > 0):
            raise ValueError("need B > 0 and C > 0")
        if not self.D > 1.0:
            raise ValueError(f"degenerate layer: D = {self.D:.6g} <= 1")


@dataclass(frozen=True)
class NPFields:
    n: np.ndarray
    p: np.ndarray


def _csch2(y):
    e = np.exp(-2.0 * np.asarray(y, dtype=float))
    return 4.0 * e / np.expm1(-2.0 * np.asarray(y, dtype=float)) ** 2


def _sech2(y):
    e = np.exp(-2.0 * np.asarray(y, dtype=float))
    return 4.0 * e / (1.0 + e) ** 2


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -1.0) or np.any(x > 1.0):
        raise ValueError("x must lie in [-1, 1]")
    return x


def b2_params(alpha1: float, beta2: float, v_end: float, side: str, rate_scale: float = 1.0
              ) -> EnvelopeParams:
    """Envelope constants for a layer reaching v_end at the wall.

    ``rate_scale`` multiplies the layer rate R; values other than 1 give the
    exact solutions of eps^2 v'^2 = k F(v) with k = rate_scale^2.
    """
    if not (alpha1 > 0 and beta2 > 0):
        raise ValueError("alpha1 and beta2 must be positive")
    r = np.sqrt(alpha1 + beta2)
    s = np.sqrt(alpha1 * np.exp(v_end) + beta2)
    if side == "plus":
        if not v_end > 0:
            raise ValueError(f"degenerate plus layer: v(1) = {v_end:.3g} <= 0")
        d = (s + r) / (s - r)
    elif side == "minus":
        if not v_end < 0:
            raise ValueError(f"degenerate minus layer: v(-1) = {v_end:.3g} >= 0")
        d = (r + s) / (r - s)
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    return EnvelopeParams(1.0, 1.0 + beta2 / alpha1, rate_scale * r, float(d), side)


def eval_b2(params: EnvelopeParams, c: float, eps: float, x):
    x = _check_x(x)
    if params.side == "plus":
        theta = params.C * (1.0 - x) / eps + np.log(params.D)
        out = c + np.log1p((params.A - 1.0) + params.B * _csch2(0.5 * theta))
    else:
        theta = params.C * (1.0 + x) / eps + np.log(params.D)
        out = c + np.log1p((params.A - 1.0) - params.B * _sech2(0.5 * theta))
    return float(out) if out.ndim == 0 else out


def envelope_b2(alpha1: float, beta2: float, t: float, c: float, eps: float, side: str, x):
    """Limiting boundary-layer profile for the (1; 1, 2) valence pattern.

    Uses A = 1, B = 1 + beta2/alpha1, C = sqrt(alpha1 + beta2) and D built
    from e^{+-t - c}. The printed csch^2/sech^2 argument is halved here: only
    theta/2 gives an exact layer solution with phi(+-1) = +-t.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    v_end = (t - c) if side == "plus" else (-t - c)
    return eval_b2(b2_params(alpha1, beta2, v_end, side), c, eps, x)


def two_two_constants(alpha1, alpha2, beta1, beta2, t, c, side):
    """(A, B, C_tilde, H) limits for the a = b = (1, 2) pattern."""
    if min(alpha1, alpha2, beta1, beta2) <= 0:
        raise ValueError("concentrations must be positive")
    if abs(alpha1 + 2 * alpha2 - beta1 - 2 * beta2) > NEUTRAL_ABS:
        raise ValueError("need alpha1 + 2 alpha2 = beta1 + 2 beta2")
    a = 1.0 + alpha1 / (2.0 * alpha2)
    b2 = a * a - beta2 / alpha2
    if not b2 > 0:
        raise ValueError("B is imaginary (beta2/alpha2 too large)")
    b = np.sqrt(b2)
    ct = np.sqrt(alpha2 * ((a + 1.0) ** 2 - b2))
    sgn = 1.0 if side == "plus" else -1.0
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    e = np.exp(sgn * t - c)
    p = np.sqrt((a - b + e) / (a + b + e))
    q = np.sqrt((a - b + 1.0) / (a + b + 1.0))
    h = (p + q) / (sgn * p - sgn * q)
    if not h > 0:
        raise ValueError("degenerate layer: H <= 0")
    return float(a), float(b), float(ct), float(h)


def envelope_two_two(alpha1, alpha2, beta1, beta2, t, c, eps, side, x):
    """Limiting layer profile for anions and cations both of valences (1, 2)."""
    x = _check_x(x)
    a, b, ct, hh = two_two_constants(alpha1, alpha2, beta1, beta2, t, c, side)
    sgn = 1.0 if side == "plus" else -1.0
    h = ct * (1.0 - sgn * x) / eps + np.log(hh)
    # cosh h can overflow deep in the interior; work with sech h instead
    eh = np.exp(-np.abs(h))
    sech = 2.0 * eh / (1.0 + eh * eh)
    num = 1.0 + sgn * (a * a - b * b + a) / b * sech
    den = 1.0 - sgn * (a + 1.0) / b * sech
    if np.any(np.abs(den) < 1e-14):
        raise ZeroDivisionError("cosh h sits on the envelope pole")
    out = c + np.log(num / den)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# checks on converged solutions
# --------------------------------------------------------------------------

def _is_b2(sys: IonSystem) -> bool:
    return (len(sys.anions) == 1 and len(sys.cations) == 2 and sys.a[0] == 1.0
            and tuple(sys.b) == (1.0, 2.0) and sys.electroneutral)


def _mismatch(solution: Field, sys: IonSystem, c: float, eps: float) -> np.ndarray:
    v = solution.values - c
    dv = solution.derivative()
    return np.abs(eps * eps * dv * dv - f_minus_f0(sys, v))


def layer_mismatch(solution: Field, sys: IonSystem, c: float, eps: float, mask) -> float:
    """max |eps^2 v'^2 - (f(v) - f(0))| over ``mask`` with v = phi - c."""
    if not np.any(mask):
        return 0.0
    return float(np.max(_mismatch(solution, sys, c, eps)[mask]))


def _suspect_node(r: np.ndarray, mask) -> int:
    # a single bad value at node i spoils the central differences at i - 1 and i + 1
    score = np.zeros_like(r)
    score[1:-1] = r[:-2] + r[2:]
    score[~mask] = -np.inf
    return int(np.argmax(score))


def sandwich_check(solution: Field, pair: LimitPair, sys: IonSystem, eps: float,
                   threshold: float = 0.02, slack: float = 1e-3) -> CheckResult:
    """Envelope ordering phi_1 <= phi <= phi_2 in both boundary layers.

    delta is the largest first-integral mismatch over the layer nodes; the
    comparison envelopes solve eps^2 w'^2 = k F(w) with k = 1 - sqrt(delta)
    and 1 + sqrt(delta) and pass through the solution's own v(+-1). Nodes
    where F(v) < sqrt(delta) are skipped since there the mismatch can
    dominate F. Violations larger than ``slack`` fail.
    """
    if not _is_b2(sys):
        raise ValueError("sandwich check needs a = (1), b = (1, 2) and electroneutral species")
    x, phi, c = solution.x, solution.values, pair.c
    if pair.t - c < 1e-6:
        return CheckResult("sandwich", 0.0, 0.0, slack, advisory=True, detail="empty layer region")
    alpha1, beta2 = sys.alpha[0], sys.beta[1]
    inside = np.abs(phi - c) <= threshold
    if not np.any(inside):
        return CheckResult("sandwich", np.inf, 0.0, slack, advisory=True,
                           detail="no node within threshold of c")
    y_plus, y_minus = x[inside].max(), x[inside].min()
    region = (x > y_plus) | (x < y_minus)
    delta = layer_mismatch(solution, sys, c, eps, region)
    root = np.sqrt(delta)
    if root >= 1.0:
        k = _suspect_node(_mismatch(solution, sys, c, eps), region)
        return CheckResult("sandwich", np.inf, 0.0, slack, advisory=True,
                           detail=f"delta={delta:.3g} too large, worst at x={x[k]:.6f}")
    rate_lo, rate_hi = np.sqrt(1.0 - root), np.sqrt(1.0 + root)
    use = region & (f_minus_f0(sys, phi - c) >= root)
    worst, where = 0.0, float("nan")
    for side, part in (("plus", x > y_plus), ("minus", x < y_minus)):
        sel = use & part
        if not np.any(sel):
            continue
        v_end = (phi[-1] if side == "plus" else phi[0]) - c
        slow = eval_b2(b2_params(alpha1, beta2, v_end, side, rate_lo), c, eps, x[sel])
        fast = eval_b2(b2_params(alpha1, beta2, v_end, side, rate_hi), c, eps, x[sel])
        lower, upper = (fast, slow) if side == "plus" else (slow, fast)
        viol = np.maximum(lower - phi[sel], phi[sel] - upper)
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, where = float(viol[k]), float(x[sel][k])
    detail = f"delta={delta:.3g} layer=[-1,{y_minus:.4f})U({y_plus:.4f},1]"
    if worst > 0:
        detail += f" worst at x={where:.6f}"
    return CheckResult("sandwich", max(worst, 0.0), 0.0, slack, advisory=True, detail=detail)


def gradient_rate(sys: IonSystem, phi_minus: float) -> float:
    """M1 = (1/2) (sum a^2 alpha e^{2 a phi-} + sum b^2 beta e^{2 b phi-})^{1/2}."""
    a, al, b, be = sys.a, sys.alpha, sys.b, sys.beta
    check_exponent(2 * np.concatenate([a, b]) * phi_minus)
    s = np.sum(a * a * al * np.exp(2 * a * phi_minus)) + np.sum(b * b * be * np.exp(2 * b * phi_minus))
    return float(0.5 * np.sqrt(s))


def gradient_bound_check(solution: Field, sys: IonSystem, bd: BoundaryData, eps: float,
                         slack: float = 0.05) -> CheckResult:
    """0 <= phi' <= phi'(1) (e^{-M1(1+x)/eps} + e^{-M1(1-x)/eps}) up to ``slack``."""
    x = solution.x
    dphi = solution.derivative()
    m1 = gradient_rate(sys, bd.phi_minus)
    c1 = eps * dphi[-1]
    bound = (c1 / eps) * (np.exp(-m1 * (1 + x) / eps) + np.exp(-m1 * (1 - x) / eps))
    scale = float(np.abs(dphi).max())
    if scale <= 1e-10 * max(1.0, float(np.abs(solution.values).max())):
        return CheckResult("gradient_bound", 0.0, 0.0, 0.0, detail="flat solution")
    viol = np.maximum(-dphi - 1e-9 * scale, dphi - (1 + slack) * bound)
    viol = np.maximum(viol, 0.0)
    k = int(np.argmax(viol))
    detail = f"M1={m1:.4g} C1={c1:.4g}"
    if viol[k] > 0:
        detail += f" first violation at x={x[np.flatnonzero(viol > 0)[0]]:.6f}"
    return CheckResult("gradient_bound", float(viol[k] / scale), 0.0, 0.0, detail=detail)


def pb_decay_constant(sys: IonSystem, span: float = 10.0, n: int = 20001) -> float:
    """C5 = inf_{s != 0} f'(s)/s, by a scan of [-span, span] plus the s -> 0 limit."""
    s = np.linspace(-span, span, n)
    s = s[s != 0.0]
    zmax = float(max(sys.a.max(), sys.b.max()))
    s = s[np.abs(s) * zmax <= 700.0]
    ratio = f_prime(sys, s) / s
    f2 = float(np.sum(np.concatenate([sys.a, sys.b]) ** 2 * np.concatenate([sys.alpha, sys.beta])))
    return float(min(ratio.min(), f2))


def pb_decay_check(solution: Field, sys: IonSystem, bd: BoundaryData, eps: float,
                   slack: float = 0.05) -> CheckResult:
    """|phi| <= max|phi0| (e^{-sqrt(C5)(1+x)/(2 eps)} + e^{-sqrt(C5)(1-x)/(2 eps)})."""
    x, phi = solution.x, solution.values
    c5 = pb_decay_constant(sys)
    rate = np.sqrt(c5) / (2 * eps)
    amp = max(abs(bd.phi_plus), abs(bd.phi_minus))
    bound = amp * (np.exp(-rate * (1 + x)) + np.exp(-rate * (1 - x)))
    viol = np.maximum(np.abs(phi) - (1 + slack) * bound, 0.0)
    k = int(np.argmax(viol))
    return CheckResult("pb_decay_bound", float(viol[k]), 0.0, 0.0, detail=f"C5={c5:.4g}")


def np_fields(solution: Field, alpha: float, beta: float) -> NPFields:
    """Monovalent concentrations n = alpha e^phi / int e^phi, p = beta e^-phi / int e^-phi."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    u = solution.values
    check_exponent(u)
    w = solution.grid.weights
    ep, em = np.exp(u), np.exp(-u)
    return NPFields(alpha * ep / (w @ ep), beta * em / (w @ em))


def nonneutral_checks(solution: Field, alpha: float, beta: float, eps: float,
                      kappa: float = 0.5) -> DiagnosticsReport:
    """Fixed-eps comparison against the eps -> 0 limits for 0 < alpha < beta."""
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta; for alpha > beta swap the roles of n and p")
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    grid, x, phi = solution.grid, solution.x, solution.values
    fl = np_fields(solution, alpha, beta)
    e2 = eps * eps
    rep = DiagnosticsReport()
    ref_a = (alpha - beta) ** 2 / 8
    for side, k in (("+1", -1), ("-1", 0)):
        rep.add(CheckResult(f"eps2_p({side})", e2 * fl.p[k], ref_a, 0.1 * ref_a))
    collar = eps ** kappa
    interior = (x >= -1 + collar) & (x <= 1 - collar)
    sup_n = float(np.max(np.abs(fl.n[interior] - alpha / 2)))
    sup_p = float(np.max(np.abs(fl.p[interior] - alpha / 2)))
    rep.add(CheckResult("sup|n-alpha/2|", sup_n, 0.0, 0.05))
    rep.add(CheckResult("sup|p-alpha/2|", sup_p, 0.0, 0.05))
    ref_p = (beta - alpha) / 2
    for side, (lo, hi) in (("-1", (-1.0, -1 + collar)), ("+1", (1 - collar, 1.0))):
        rep.add(CheckResult(f"int_n_collar({side})", integrate(grid, fl.n, lo, hi), 0.0,
                            0.15 * ref_p, advisory=True))
        rep.add(CheckResult(f"int_p_collar({side})", integrate(grid, fl.p, lo, hi), ref_p,
                            0.15 * ref_p))
    expansion = solution.at(0.0) - phi[-1] - np.log(1 / e2)
    rep.add(CheckResult("phi(0)-phi(1)-log(1/eps^2)", expansion,
                        np.log((alpha - beta) ** 2 / (4 * alpha)), 0.15))
    slope = e2 * solution.derivative()[-1]
    ref_e = (alpha - beta) / 2
    rep.add(CheckResult("eps2_phi'(1)", slope, ref_e, 0.1 * abs(ref_e)))
    rep.extra.update(kappa=kappa, lambda_eps=max(sup_n, sup_p), collar=collar,
                     np_product_min=float(np.min(fl.n * fl.p)),
                     np_product_max=float(np.max(fl.n * fl.p)))
    return rep


def inflection_point(solution: Field) -> float:
    """x*_eps: location of the sign change of the discrete second difference."""
    d2 = solution.second_difference()
    s = np.sign(d2)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    if idx.size == 0:
        return float("nan")
    i = idx[len(idx) // 2]
    x = solution.x[1:-1]
    return float(x[i] - d2[i] * (x[i + 1] - x[i]) / (d2[i + 1] - d2[i]))
