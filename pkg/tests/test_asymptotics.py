import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import MAIN, nonneutral_solution, preset_bd, preset_solution
from ccpb import BoundaryData, Field, IonSystem, make_uniform
from ccpb.asymptotics import (CheckResult, DiagnosticsReport, EnvelopeParams, b2_params,
                              envelope_b2, envelope_two_two, eval_b2, gradient_bound_check,
                              inflection_point, nonneutral_checks, np_fields, pb_decay_check,
                              sandwich_check, two_two_constants)
from ccpb.ions import f_minus_f0
from ccpb.limits import LimitPair, solve_tc

EPS = 2.0 ** -5


def _layer_residual(sys_, c, eps, x, values):
    v = values - c
    dv = np.gradient(v, x, edge_order=2)
    fm = f_minus_f0(sys_, v)
    return np.max(np.abs(eps * eps * dv * dv - fm)) / np.max(fm)


@pytest.fixture(scope="module")
def main_pair():
    return solve_tc(MAIN, 1.0, 0.0)


def test_envelope_b2_interior_and_walls(main_pair):
    t, c = main_pair.t, main_pair.c
    args = (1.2, 0.4, t, c, EPS)
    deep = np.linspace(-1 + 40 * EPS, 1 - 40 * EPS, 7)
    deep = deep[(1 - deep) / EPS >= 40]
    assert np.all(envelope_b2(*args, "plus", deep) == c)
    assert np.all(envelope_b2(*args, "minus", -deep) == c)
    assert abs(envelope_b2(*args, "plus", 1.0) - t) <= 1e-12
    assert abs(envelope_b2(*args, "minus", -1.0) + t) <= 1e-12


def test_envelope_b2_wall_value_against_closed_form(main_pair):
    t, c = main_pair.t, main_pair.c
    al, b2 = 1.2, 0.4
    r = math.sqrt(al + b2)
    s = math.sqrt(al * math.exp(t - c) + b2)
    d = (s + r) / (s - r)
    big_b = 1 + b2 / al
    oracle = c + math.log(1 + big_b / math.sinh(0.5 * math.log(d)) ** 2)
    assert envelope_b2(al, b2, t, c, EPS, "plus", 1.0) == pytest.approx(oracle, abs=1e-12)
    # the un-halved argument would not reach t at the wall
    unhalved = c + math.log(1 + big_b / math.sinh(math.log(d)) ** 2)
    assert abs(unhalved - t) > 1e-2


def test_envelope_b2_monotone_and_solves_layer_equation(main_pair):
    t, c = main_pair.t, main_pair.c
    xp = np.linspace(0.5, 1.0, 20001)
    up = envelope_b2(1.2, 0.4, t, c, EPS, "plus", xp)
    assert np.all(np.diff(up[xp >= 0.9]) > 0)
    assert _layer_residual(MAIN, c, EPS, xp, up) <= 1e-5
    xm = -xp[::-1]
    um = envelope_b2(1.2, 0.4, t, c, EPS, "minus", xm)
    assert np.all(np.diff(um[xm <= -0.9]) > 0)
    assert _layer_residual(MAIN, c, EPS, xm, um) <= 1e-5


def test_envelope_b2_errors(main_pair):
    with pytest.raises(ValueError):
        envelope_b2(1.2, 0.4, 0.1, 0.2, EPS, "plus", 1.0)
    with pytest.raises(ValueError):
        envelope_b2(1.2, 0.4, 1.0, -0.1, EPS, "plus", 1.5)
    with pytest.raises(ValueError):
        envelope_b2(1.2, 0.4, 1.0, -0.1, EPS, "left", 1.0)
    with pytest.raises(ValueError):
        envelope_b2(1.2, 0.4, 1.0, -0.1, 0.0, "plus", 1.0)
    with pytest.raises(ValueError):
        EnvelopeParams(1.0, 1.0, 1.0, 0.9, "plus")


def test_plus_side_envelopes_ordered(main_pair):
    # slower rate stays above the faster one on the plus side
    c = main_pair.c
    v_end = 1.0 - c
    x = np.linspace(0.5, 1.0, 2001)
    for k in (0.5, 0.9, 0.99):
        lo = eval_b2(b2_params(1.2, 0.4, v_end, "plus", math.sqrt(1 + k)), c, EPS, x)
        hi = eval_b2(b2_params(1.2, 0.4, v_end, "plus", math.sqrt(1 - k)), c, EPS, x)
        assert np.all(lo <= hi + 1e-14)


def test_two_two_constants_example():
    a, b, ct, h = two_two_constants(0.5, 0.5, 0.5, 0.5, 1.0, 0.0, "plus")
    assert a == pytest.approx(1.5)
    assert b == pytest.approx(math.sqrt(1.25))
    assert ct == pytest.approx(math.sqrt(2.5), abs=1e-12)
    assert h > 0


@pytest.mark.parametrize("al", [(0.5, 0.5, 0.5, 0.5), (0.6, 0.4, 0.4, 0.5), (1.0, 0.3, 0.6, 0.5)])
@pytest.mark.parametrize("gamma", [0.0, 0.5])
def test_two_two_envelope(al, gamma):
    sys_ = IonSystem([(1, al[0]), (2, al[1])], [(1, al[2]), (2, al[3])])
    p = solve_tc(sys_, 1.0, gamma)
    eps = 0.05
    assert envelope_two_two(*al, p.t, p.c, eps, "plus", 1.0) == pytest.approx(p.t, abs=1e-12)
    assert envelope_two_two(*al, p.t, p.c, eps, "minus", -1.0) == pytest.approx(-p.t, abs=1e-12)
    assert abs(envelope_two_two(*al, p.t, p.c, eps, "plus", 1 - 40 * eps) - p.c) <= 1e-9
    assert abs(envelope_two_two(*al, p.t, p.c, eps, "minus", -1 + 40 * eps) - p.c) <= 1e-9
    x = np.linspace(0.5, 1.0, 20001)
    assert _layer_residual(sys_, p.c, eps, x,
                           envelope_two_two(*al, p.t, p.c, eps, "plus", x)) <= 1e-5


def test_two_two_symmetric_reflection():
    x = np.linspace(0.2, 1.0, 101)
    plus = envelope_two_two(0.5, 0.5, 0.5, 0.5, 0.8, 0.0, 0.1, "plus", x)
    minus = envelope_two_two(0.5, 0.5, 0.5, 0.5, 0.8, 0.0, 0.1, "minus", -x)
    np.testing.assert_allclose(minus, -plus, atol=1e-13)


def test_two_two_errors():
    with pytest.raises(ValueError):
        two_two_constants(0.1, 0.1, 0.1, 0.9, 1.0, 0.0, "plus")
    with pytest.raises(ValueError):
        two_two_constants(0.5, 0.5, 0.5, 0.6, 1.0, 0.0, "plus")
    with pytest.raises(ValueError):
        two_two_constants(0.5, 0.5, 0.5, 0.5, 1.0, 0.0, "up")


# checks on converged solutions

def test_sandwich_preset_i():
    rep = preset_solution("I", 5)
    res = sandwich_check(rep.field, solve_tc(MAIN, 1.0, 0.0), MAIN, rep.eps)
    assert res.advisory
    assert res.passed, res.detail


def test_sandwich_vacuous_when_layer_empty():
    g = make_uniform(64)
    res = sandwich_check(Field(g, np.zeros(g.n)), LimitPair(1e6, 1e-7, 0.0, 0, 0), MAIN, 0.1)
    assert res.passed and "empty" in res.detail


def test_sandwich_detects_corruption():
    rep = preset_solution("I", 5)
    x = rep.field.x
    k = int(np.argmin(np.abs(x - (1 - 2 * rep.eps))))
    u = rep.phi.copy()
    u[k] += 0.2
    res = sandwich_check(Field(rep.field.grid, u), solve_tc(MAIN, 1.0, 0.0), MAIN, rep.eps)
    assert not res.passed
    assert f"x={x[k]:.6f}" in res.detail


def test_sandwich_rejects_other_valences():
    g = make_uniform(8)
    with pytest.raises(ValueError):
        sandwich_check(Field(g, g.nodes), LimitPair(0, 1, 0, 0, 0),
                       IonSystem([(1, 1)], [(1, 1)]), 0.1)


def test_gradient_bound_preset_i():
    rep = preset_solution("I", 5)
    assert gradient_bound_check(rep.field, MAIN, preset_bd("I", rep.eps), rep.eps).passed


def test_gradient_bound_constant_solution():
    g = make_uniform(64)
    res = gradient_bound_check(Field(g, np.full(g.n, 0.3)), MAIN, BoundaryData(.3, .3, .1), 0.1)
    assert res.passed and res.value == 0


def test_pb_decay_bound():
    rep = preset_solution("I", 5, "pb")
    assert pb_decay_check(rep.field, MAIN, preset_bd("I", rep.eps), rep.eps).passed


def test_inflection_point_near_origin():
    rep = preset_solution("I", 3)
    assert abs(inflection_point(rep.field)) < 0.5


# non-neutral diagnostics

def test_np_fields_constant():
    g = make_uniform(16)
    fl = np_fields(Field(g, np.full(g.n, 0.7)), 1.0, 2.0)
    np.testing.assert_allclose(fl.n, 0.5, rtol=1e-14)
    np.testing.assert_allclose(fl.p, 1.0, rtol=1e-14)
    with pytest.raises(ValueError):
        np_fields(Field(g, np.zeros(g.n)), 0.0, 1.0)


@settings(max_examples=40)
@given(st.lists(st.floats(-4, 4), min_size=33, max_size=33), st.floats(0.1, 3), st.floats(0.1, 3))
def test_np_fields_normalised(vals, alpha, beta):
    g = make_uniform(32)
    fl = np_fields(Field(g, np.array(vals)), alpha, beta)
    assert g.weights @ fl.n == pytest.approx(alpha, rel=1e-10)
    assert g.weights @ fl.p == pytest.approx(beta, rel=1e-10)


def test_nonneutral_solution_structure():
    rep = nonneutral_solution(4)
    u = rep.phi
    np.testing.assert_allclose(u, u[::-1], atol=1e-8)
    fl = np_fields(rep.field, 1.0, 2.0)
    assert np.all(fl.n <= fl.p)
    # n - p = eps^2 phi'' on interior nodes
    d2 = rep.field.second_difference()
    gap = (fl.n - fl.p)[1:-1]
    assert np.max(np.abs(rep.eps ** 2 * d2 - gap)) <= 1e-2 * np.max(np.abs(gap))
    assert np.all(rep.eps ** 2 * d2 <= 1e-9)
    prod = fl.n * fl.p
    assert prod.max() - prod.min() <= 1e-6 * prod.max()


def test_lambda_decreases_with_eps():
    lam = [nonneutral_checks(nonneutral_solution(k).field, 1.0, 2.0, 2.0 ** -k)
           .extra["lambda_eps"] for k in (3, 4, 5)]
    assert lam[0] > lam[1] > lam[2]


def test_nonneutral_references_and_items():
    rep = nonneutral_solution(4)
    d = nonneutral_checks(rep.field, 1.0, 2.0, rep.eps)
    assert d["eps2_p(+1)"].reference == pytest.approx(0.125)
    assert d["phi(0)-phi(1)-log(1/eps^2)"].reference == pytest.approx(math.log(0.25))
    assert d["eps2_phi'(1)"].reference == -0.5
    assert d["eps2_p(+1)"].passed and d["eps2_p(-1)"].passed
    assert d["eps2_phi'(1)"].passed
    assert d["phi(0)-phi(1)-log(1/eps^2)"].passed


def test_nonneutral_all_items_pass_at_smaller_eps():
    rep = nonneutral_solution(5)
    d = nonneutral_checks(rep.field, 1.0, 2.0, rep.eps)
    assert d.passed, "\n".join(d.lines())


def test_nonneutral_rejects_bad_input():
    g = make_uniform(8)
    f = Field(g, np.zeros(g.n))
    with pytest.raises(ValueError):
        nonneutral_checks(f, 1.0, 1.0, 0.1)
    with pytest.raises(ValueError, match="swap"):
        nonneutral_checks(f, 2.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        nonneutral_checks(f, 1.0, 2.0, 0.1, kappa=1.0)


def test_diagnostics_report_semantics():
    rep = DiagnosticsReport()
    rep.add(CheckResult("a", 1.0, 1.04, 0.05))
    rep.add(CheckResult("b", 3.0, 0.0, 1.0, advisory=True))
    assert rep["a"].passed and not rep["b"].passed
    assert rep.passed
    rep.add(CheckResult("c", 0.2, 0.0, 0.1))
    assert not rep.passed
    lines = rep.lines()
    assert lines[0].startswith("PASS") and lines[1].startswith("WARN") and lines[2].startswith("FAIL")
    with pytest.raises(KeyError):
        rep["missing"]
