import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from wdwhittle import dependence as dep
from wdwhittle import processes as proc
from wdwhittle.dependence import DependenceProfile

GAUSS = proc.InnovationSpec("gaussian", 1.0)
LOG2 = math.log(2)


def riemannian(a, L=400, lo=0):
    j = np.arange(lo, lo + L)
    return (1.0 + np.abs(j)) ** -float(a)


# ---------------------------------------------------------------- transfer lemma


def test_transfer_identity_map():
    p = DependenceProfile("theta", "riemannian", exponent=3.0)
    assert dep.transfer_lemma(p, 7.0, 1.0).exponent == pytest.approx(3.0)


@given(st.floats(2.5, 40), st.floats(2.1, 30))
def test_transfer_square(nu, m):
    p = DependenceProfile("theta", "riemannian", exponent=nu - 1)
    out = dep.transfer_lemma(p, m, 2.0)
    assert out.exponent == pytest.approx((nu - 1) * (m - 2) / (m - 1))
    assert out.moment_order == pytest.approx(m / 2)


def test_transfer_degenerate():
    p = DependenceProfile("theta", "riemannian", exponent=3.0)
    assert dep.transfer_lemma(p, 5.0, 5.0 - 1e-9).exponent < 1e-8
    with pytest.raises(ValueError, match="moment deficit"):
        dep.transfer_lemma(p, 5.0, 5.0)


# ---------------------------------------------------------------- profiles


def test_two_sided_linear_profile():
    m = proc.TwoSidedLinear(riemannian(4, 300, -150), -150, GAUSS, proc.Decay("riemannian", 4.0))
    prof = dep.derive_profile(m, 8)
    assert (prof.kind, prof.rate, prof.exponent) == ("eta", "riemannian", 3.5)


def test_arch_profile_exponent():
    b = 0.05 * np.arange(1, 300, dtype=float) ** -5.0
    prof = dep.derive_profile(proc.ArchInf(1.0, b, GAUSS, proc.Decay("riemannian", 5.0)), 12)
    assert prof.kind == "theta"
    assert Fraction(prof.exponent).limit_denominator(100) == Fraction(40, 11)
    assert prof.moment_order == 6


def test_garch_profile_geometric():
    prof = dep.derive_profile(proc.Garch(1.0, (0.1,), (0.2,), GAUSS), 12)
    assert prof.rate == "geometric" and prof.power == 0.5


def test_linear_dependent_innovations_profile():
    inner = proc.TwoSidedLinear(riemannian(6.5, 200, -100), -100, GAUSS, proc.Decay("riemannian", 6.5))
    model = proc.LinearDepInnov(riemannian(4, 200), inner, 0, proc.Decay("riemannian", 4.0))
    prof = dep.derive_profile(model, 12)
    assert prof.exponent == pytest.approx(40 / 11)


def test_volterra_profile():
    terms = {(j,): (1 + j) ** -5.0 for j in range(50)} | {(0, 1): 0.1}
    prof = dep.derive_profile(proc.Volterra(terms, GAUSS, proc.Decay("riemannian", 5.0)), 8)
    assert prof.exponent == pytest.approx(4.0)


def test_bilinear_profile_is_riemannian_log():
    a = 0.2 * np.arange(1, 200, dtype=float) ** -6.0
    prof = dep.derive_profile(proc.Bilinear(1.0, a, [0.3], GAUSS, proc.Decay("riemannian", 6.0)), 8)
    assert prof.rate == "riemannian_log"
    assert 0 < prof.exponent <= 5.0


# ---------------------------------------------------------------- CLT conditions


def test_theta_summability_example():
    rep = dep.check_clt_condition(DependenceProfile("theta", "riemannian", exponent=5.0), 5)
    assert rep.supplied == pytest.approx(1.25) and rep.passed


def test_eta_below_threshold():
    rep = dep.check_clt_condition(DependenceProfile("eta", "riemannian", exponent=3.5), 8)
    assert rep.threshold == pytest.approx(3.75) and not rep.passed


@pytest.mark.parametrize("m", [4.5, 8, 50])
def test_geometric_always_passes(m):
    assert dep.check_clt_condition(DependenceProfile("theta", "geometric", c=0.3), m).passed


def test_low_moment_order_fails():
    assert dep.check_clt_condition(DependenceProfile("theta", "geometric", c=1.0), 4).passed is False


def test_sobolev_index_guard():
    with pytest.raises(ValueError):
        dep.check_clt_condition(DependenceProfile("eta", "geometric", c=1.0), 8, s=0.5)


# ---------------------------------------------------------------- thresholds


@pytest.mark.parametrize("family, m, expected", [
    ("linear", 8, 4.25),
    ("arch", 9, 9.0),
    ("volterra", 11, 4.0),
    ("theorem3", 8, 3.75),
    ("bilinear", 9, 2.6),
])
def test_threshold_examples(family, m, expected):
    assert dep.proposition_thresholds(family, m)[0].threshold == pytest.approx(expected)


@pytest.mark.parametrize("family, pole", [("arch", 8), ("linear", 4), ("volterra", 4), ("bilinear", 4)])
def test_thresholds_undefined_at_pole(family, pole):
    with pytest.raises(ValueError, match="undefined"):
        dep.proposition_thresholds(family, pole)


@given(st.floats(4.01, 200))
def test_thresholds_against_symbolic(mv):
    m = sp.Symbol("m", positive=True)
    exprs = {
        "linear": sp.Max(sp.Rational(7, 2), (5 * m - 6) / (2 * (m - 4))),
        "volterra": 4 + sp.Max(0, (11 - m) / (m - 4)),
        "bilinear": (2 * m - 5) / (m - 4),
        "theorem3": sp.Max(3, (2 * m - 1) / (m - 4)),
    }
    for fam, e in exprs.items():
        assert dep.proposition_thresholds(fam, mv)[0].threshold == pytest.approx(float(e.subs(m, mv)), rel=1e-12)


def test_supplied_values_compared_strictly():
    assert dep.proposition_thresholds("arch", 9, nu=9.1)[0].passed
    assert not dep.proposition_thresholds("arch", 9, nu=9.0)[0].passed
    assert dep.proposition_thresholds("arch", 9)[0].passed is None


def test_bilinear_nu2_infeasible_when_sup_below_target():
    c = np.array([0.3, 0.1])
    assert dep._best_nu2_rate(c) < 5 / 8
    assert not dep.bilinear_nu2_threshold(c, 9)["feasible"]


def test_bilinear_nu2_threshold_solves_the_system():
    c = np.array([0.02])
    sol = dep.bilinear_nu2_threshold(c, 9)
    assert sol["feasible"]
    delta, phi = dep._bilinear_phi(sol["nu2"], c)
    assert phi == pytest.approx(sol["target"], abs=1e-8)
    assert delta > LOG2 * (9 - 4) / (9 - 1)


def test_linear_dep_threshold_value():
    rep = dep.proposition_thresholds("linear_dep", 12, a=4, b=6)[0]
    assert rep.supplied == pytest.approx(40 / 11)
    assert rep.threshold == pytest.approx(max(3, 23 / 8))
    assert rep.passed


# ---------------------------------------------------------------- rate exponent


def test_rate_example():
    r = dep.vite_rate_exponent(10, 8, 1)
    assert r.lam == pytest.approx(25 / 178)
    assert r.t == pytest.approx(0.5)
    assert r.rate == pytest.approx(25 / 1246, abs=1e-12)


def test_rate_vanishes_at_threshold():
    assert dep.vite_rate_exponent(15 / 4, 8, 1).lam == 0.0


def test_rate_below_threshold_rejected():
    with pytest.raises(ValueError, match="condition violated"):
        dep.vite_rate_exponent(3.5, 8, 1)


def test_rate_limit_is_monotone():
    rates = [dep.vite_rate_exponent(a, 8, s).rate for a, s in [(5, 2), (20, 5), (200, 50), (1e5, 1e5)]]
    assert all(b > a for a, b in zip(rates, rates[1:]))
    assert rates[-1] == pytest.approx((8 - 4) / (2 * 8), rel=1e-3)
