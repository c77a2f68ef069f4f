import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.optimize import brentq, fsolve

from ccpb.ions import IonSystem, f_minus_f0
from ccpb.limits import (c_star_bracket, c_star_neutral, default_gammas, gamma_sweep,
                         pb_nonneutral_r, pb_t_hat, ratio_ca1, ratio_ca2, solve_tc,
                         tc_residuals)
from ccpb.presets import get_preset

R1 = IonSystem([(1, 3)], [(1, 1), (2, 1)])
R1_2 = IonSystem([(1, 5)], [(1, 1), (2, 2)])
R1_3 = IonSystem([(1, 7)], [(1, 1), (2, 3)])
MAIN = IonSystem([(1, 1.2)], [(1, 0.4), (2, 0.4)])
SYMMETRIC = IonSystem([(1, 1.0), (2, 0.5)], [(1, 1.0), (2, 0.5)])


def _scan_root(fun, lo, hi, levels=6, n=2001):
    """Nested brute-force scan: locate the sign change, zoom, repeat."""
    for _ in range(levels):
        x = np.linspace(lo, hi, n)
        y = np.array([fun(v) for v in x])
        k = int(np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:]))[0])
        lo, hi = x[k], x[k + 1]
    return 0.5 * (lo + hi)


def test_solve_tc_table_values():
    p = solve_tc(R1, 1.0, 0.0)
    assert (p.t, round(p.c, 4)) == (1.0, -0.1126)
    p = solve_tc(R1, 1.0, 0.5)
    assert p.t == pytest.approx(0.4960, abs=5e-5)
    assert p.c == pytest.approx(-0.0299, abs=5e-5)
    assert p.t_minus_c == pytest.approx(p.t - p.c)


@pytest.mark.parametrize("sys_", [R1, R1_2, MAIN, SYMMETRIC])
def test_large_gamma_limit(sys_):
    p = solve_tc(sys_, 1.0, 1e6)
    assert abs(p.t) + abs(p.c) < 1e-3


def test_solve_tc_errors():
    with pytest.raises(ValueError):
        solve_tc(IonSystem([(1, 1)], [(1, 2)]), 1.0, 0.5)
    with pytest.raises(ValueError):
        solve_tc(R1, 0.0, 0.5)
    with pytest.raises(ValueError):
        solve_tc(R1, 1.0, -0.1)


def test_c_star_neutral_examples():
    assert c_star_neutral(R1, 1.0) == pytest.approx(-0.1126, abs=5e-5)
    assert c_star_neutral(SYMMETRIC, 1.0) == pytest.approx(0.0, abs=1e-13)
    assert c_star_neutral(R1_2, 1.0) == pytest.approx(-0.1265, abs=5e-5)
    with pytest.raises(ValueError):
        c_star_neutral(R1, -1.0)


def test_c_star_bracket_examples():
    assert c_star_bracket(1.0) == pytest.approx(-0.1446, abs=5e-5)
    assert c_star_bracket(0.4960) == pytest.approx(-0.0394, abs=5e-5)
    assert abs(c_star_bracket(1e-9)) < 1e-15
    assert c_star_bracket(800.0) == pytest.approx(-(800 - math.log(2)) / 3)
    with pytest.raises(ValueError):
        c_star_bracket(0.0)


def test_ratio_ca1_examples():
    assert ratio_ca1(1.0, -0.1265) == pytest.approx(0.5, abs=0.005)
    assert ratio_ca1(1.0, -0.1126) == pytest.approx(1.0, abs=0.005)
    p = solve_tc(R1, 1.0, 0.25)
    assert ratio_ca1(p.t, p.c) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ZeroDivisionError):
        ratio_ca1(1.0, 0.0)


def test_ratio_ca2():
    for t, c in ((1.0, -0.1126), (0.7, -0.05)):
        assert ratio_ca2(t, c, 2) == pytest.approx(ratio_ca1(t, c), abs=1e-12)
    sys3 = IonSystem([(1, 4)], [(1, 1), (3, 1)])
    p = solve_tc(sys3, 1.0, 0.0)
    assert ratio_ca2(p.t, p.c, 3) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        ratio_ca2(1.0, -0.1, 1.5)
    with pytest.raises(ZeroDivisionError):
        ratio_ca2(1.0, 0.0, 3)


def test_ratio_ca2_c_decreases_along_t():
    # at fixed ratio, c(t) from the formula decreases as t grows
    def c_of(t):
        return brentq(lambda c: ratio_ca2(t, c, 3) - 1.0, -t + 1e-9, -1e-9)

    ts = np.linspace(0.2, 1.5, 14)
    cs = np.array([c_of(t) for t in ts])
    assert np.all(np.diff(cs) < 0)


def test_pb_t_hat():
    assert pb_t_hat(R1, 1.0, 0.0) == 1.0
    assert abs(pb_t_hat(R1, 1.0, 1e6)) < 1e-3
    oracle = _scan_root(lambda t: 1.0 - t - 0.5 * math.sqrt(f_minus_f0(R1, t)), 0.0, 1.0)
    assert pb_t_hat(R1, 1.0, 0.5) == pytest.approx(oracle, abs=1e-10)
    assert pb_t_hat(R1, -1.0, 0.5) == pytest.approx(
        _scan_root(lambda t: abs(-1.0 - t) - 0.5 * math.sqrt(f_minus_f0(R1, t)), -1.0, 0.0),
        abs=1e-10)


def test_pb_nonneutral_r():
    assert pb_nonneutral_r(IonSystem([(1, 1)], [(1, math.e ** 2)])) == pytest.approx(1.0, abs=1e-12)
    assert pb_nonneutral_r(R1) == 0.0
    sys_ = IonSystem([(1, 1)], [(1, 1), (2, 1)])
    fp = lambda s: math.exp(s) - math.exp(-s) - 2 * math.exp(-2 * s)
    assert pb_nonneutral_r(sys_) == pytest.approx(_scan_root(fp, -2.0, 2.0), abs=1e-10)


def test_sweep_r1_monotone():
    tab = gamma_sweep(R1, 1.0, default_gammas(50))
    assert tab.monotone_t and tab.monotone_tc
    assert tab.rows.shape == (50, 4)
    assert abs(tab.t[0] - 1.0) < 1e-2
    assert abs(tab.c[0] - tab.c_star) < 1e-2
    assert abs(tab.t[-1]) < 1e-2 and abs(tab.c[-1]) < 1e-2


def test_sweep_fig5_case_a_has_extremum():
    sys_ = IonSystem([(2, 0.75)], [(1, 0.9), (2, 0.12), (3, 0.12)])
    tab = gamma_sweep(sys_, 1.0, default_gammas())
    assert tab.c_extrema
    assert tab.monotone_t and tab.monotone_tc


def test_sweep_input_errors():
    with pytest.raises(ValueError):
        gamma_sweep(R1, 1.0, [1.0])
    with pytest.raises(ValueError):
        gamma_sweep(R1, 1.0, [1.0, 0.5])
    with pytest.raises(ValueError):
        gamma_sweep(R1, 1.0, [-1.0, 0.5])


def test_sweep_gamma_zero_row():
    tab = gamma_sweep(R1, 1.0, [0.0, 0.5])
    assert tab.t[0] == 1.0 and tab.c[0] == pytest.approx(c_star_neutral(R1, 1.0))


# property suites

@st.composite
def b2_systems(draw):
    beta1 = draw(st.floats(0.05, 3.0))
    beta2 = draw(st.floats(0.05, 3.0))
    return IonSystem([(1, beta1 + 2 * beta2)], [(1, beta1), (2, beta2)])


@st.composite
def neutral_systems(draw):
    nc = draw(st.integers(1, 3))
    b = [1.0, 2.0, 3.0][:nc]
    beta = draw(st.lists(st.floats(0.05, 2.0), min_size=nc, max_size=nc))
    a1 = draw(st.sampled_from([1.0, 2.0]))
    charge = float(np.dot(b, beta))
    if draw(st.booleans()):
        return IonSystem([(a1, charge / a1)], list(zip(b, beta)))
    frac = draw(st.floats(0.1, 0.9))
    return IonSystem([(1.0, frac * charge), (3.0, (1 - frac) * charge / 3.0)], list(zip(b, beta)))


gammas = st.one_of(st.just(0.0), st.floats(1e-3, 1e3))


@settings(max_examples=60, deadline=None)
@given(neutral_systems(), gammas, st.floats(0.2, 1.5))
def test_residual_contract(sys_, gamma, phi_plus):
    p = solve_tc(sys_, phi_plus, gamma)
    assert abs(p.c) < p.t <= phi_plus
    r1, r2 = tc_residuals(sys_, phi_plus, gamma, p.t, p.c)
    assert abs(r1) <= 1e-10 and abs(r2) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(neutral_systems(), gammas, st.floats(0.2, 5.0))
def test_scale_invariance(sys_, gamma, lam):
    p = solve_tc(sys_, 1.0, gamma)
    q = solve_tc(sys_.scaled(lam), 1.0, gamma / math.sqrt(lam))
    assert abs(p.t - q.t) <= 1e-10 and abs(p.c - q.c) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(neutral_systems(), st.floats(1e-2, 1e2), st.integers(0, 2 ** 31))
def test_unique_solution_from_random_starts(sys_, gamma, seed):
    p = solve_tc(sys_, 1.0, gamma)
    rng = np.random.default_rng(seed)

    def eqs(v):
        t, c = v
        return [1.0 - t - gamma * math.sqrt(max(f_minus_f0(sys_, t - c), 0.0)),
                f_minus_f0(sys_, t - c) - f_minus_f0(sys_, -t - c)]

    found = 0
    for _ in range(5):
        t0 = rng.uniform(0.05, 1.0)
        c0 = rng.uniform(-0.9, 0.9) * t0
        (t, c), info, ier, _ = fsolve(eqs, [t0, c0], full_output=True, xtol=1e-14)
        if ier == 1 and abs(c) < t <= 1.0 and max(map(abs, eqs((t, c)))) < 1e-12:
            found += 1
            assert abs(t - p.t) <= 1e-8 and abs(c - p.c) <= 1e-8
    assume(found > 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), gammas, st.floats(0.2, 2.0))
def test_symmetric_species_match_pb(al1, al2, gamma, phi_plus):
    sys_ = IonSystem([(1, al1), (2, al2)], [(1, al1), (2, al2)])
    p = solve_tc(sys_, phi_plus, gamma)
    assert abs(p.c) <= 1e-10
    assert abs(p.t - pb_t_hat(sys_, phi_plus, gamma)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(neutral_systems(), st.floats(0.2, 2.0))
def test_small_gamma_limit_is_c_star(sys_, phi_plus):
    p = solve_tc(sys_, phi_plus, 1e-8)
    assert abs(p.c - c_star_neutral(sys_, phi_plus)) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(b2_systems(), st.floats(1e-3, 1e3))
def test_b2_pattern_c_is_bracketed(sys_, gamma):
    p = solve_tc(sys_, 1.0, gamma)
    assert c_star_bracket(p.t) < p.c < 0


def test_presets_sweep_flags():
    for name in ("fig3-I", "fig4-2"):
        cfg = get_preset(name)
        for blk in cfg.species:
            tab = gamma_sweep(blk.system(), cfg.phi_plus, cfg.gamma_values())
            assert tab.monotone_t and tab.monotone_tc
