import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdwhittle import processes as proc
from wdwhittle.spectral import FourierFunction, sample_autocovariances
from wdwhittle.whittle import (
    asymptotic_cov,
    compute_Q_star,
    compute_W_star,
    condition_advisories,
    fit_whittle,
    fourier_coeffs,
    get_family,
    population_contrast,
    spectral_factorization,
    whittle_contrast,
)

TWO_PI = 2 * np.pi
FAMILY_POINTS = [("ar1", [0.5]), ("ma1", [-0.4]), ("arma11", [0.5, 0.2]), ("arp", [0.3, -0.2]),
                 ("garch11_squared", [0.1, 0.2])]


def family(name):
    return get_family(name, p=2) if name == "arp" else get_family(name)


# ---------------------------------------------------------------- families


@pytest.mark.parametrize("name, beta", FAMILY_POINTS)
def test_families_are_normalized(name, beta):
    assert abs(family(name).log_integral(np.array(beta))) < 1e-10


@pytest.mark.parametrize("name, beta", FAMILY_POINTS)
def test_inverse_coefficients_reproduce_inverse_shape(name, beta):
    fam = family(name)
    lam = np.linspace(-np.pi, np.pi, 17)
    np.testing.assert_allclose(fam.inv_coeffs(np.array(beta))(lam).real, 1 / fam.shape(np.array(beta), lam),
                               rtol=1e-12)


@pytest.mark.parametrize("name, beta", FAMILY_POINTS)
def test_analytic_dlog_matches_finite_differences(name, beta):
    fam = family(name)
    beta = np.array(beta, float)
    lam = np.linspace(-3, 3, 13)
    d = fam.dlog(beta, lam)
    for i in range(fam.p):
        h = np.zeros_like(beta)
        h[i] = 1e-6
        fd = (np.log(fam.shape(beta + h, lam)) - np.log(fam.shape(beta - h, lam))) / 2e-6
        np.testing.assert_allclose(d[i], fd, rtol=1e-6, atol=1e-8)


def test_ar1_inverse_coefficients_closed_form():
    c = get_family("ar1").inv_coeffs(np.array([0.3]))
    assert c.coef(0) == pytest.approx(1.09)
    assert c.coef(1) == pytest.approx(-0.3)
    assert c.coef(2) == 0.0


def test_fourier_coeffs_adaptive():
    g = fourier_coeffs(lambda lam: 1 / np.abs(1 - 0.5 * np.exp(1j * lam)) ** 2)
    ell = np.arange(0, 20)
    np.testing.assert_allclose(g.coef(ell).real, 0.5 ** ell / 0.75, atol=1e-14)


# ---------------------------------------------------------------- contrast


def test_contrast_examples(rng):
    x = rng.standard_normal(300)
    r = sample_autocovariances(x, 1)
    ident = get_family("identity")
    assert whittle_contrast(x, ident, np.array([0.0])) == pytest.approx(r[0])
    ar = get_family("ar1")
    assert whittle_contrast(x, ar, np.array([0.0])) == pytest.approx(r[0])
    for b in (-0.7, 0.25, 0.9):
        assert whittle_contrast(x, ar, np.array([b])) == pytest.approx((1 + b * b) * r[0] - 2 * b * r[1])


def test_population_contrast_minimized_at_truth(gaussian):
    truth = proc.true_spectral_density(proc.CausalLinear.arma([0.5], [], gaussian))
    fam = get_family("ar1")
    grid = np.linspace(-0.9, 0.9, 181)
    vals = [population_contrast(fam, np.array([b]), truth) for b in grid]
    assert grid[int(np.argmin(vals))] == pytest.approx(0.5)
    assert min(vals) == pytest.approx(1.0)  # = 2 pi sigma*^2 = s^2


# ---------------------------------------------------------------- fitting


def test_fit_white_noise_near_zero(gaussian):
    x = proc.simulate(proc.CausalLinear([1.0], gaussian), 4096, 42)
    fit = fit_whittle(x, get_family("ar1"))
    assert abs(fit.beta_hat[0]) < 0.05
    assert fit.sigma2_hat == pytest.approx(1 / TWO_PI, abs=0.05)


def test_fit_ar1(ar1):
    fit = fit_whittle(proc.simulate(ar1, 4096, 42), get_family("ar1"))
    assert abs(fit.beta_hat[0] - 0.5) < 0.08
    assert fit.converged and not fit.boundary_hit
    assert all(a.ok for a in fit.advisories)


def test_sigma2_identity(ar1):
    x = proc.simulate(ar1, 1024, 1)
    fam = get_family("ar1")
    fit = fit_whittle(x, fam, advisories=False)
    assert fit.sigma2_hat == whittle_contrast(x, fam, fit.beta_hat) / TWO_PI
    assert fit.contrast == whittle_contrast(x, fam, fit.beta_hat)


@pytest.mark.parametrize("name, beta, model", [
    ("ma1", 0.4, proc.CausalLinear.arma([], [0.4], proc.InnovationSpec("gaussian", 1.0))),
    ("arma11", (0.6, -0.3), proc.CausalLinear.arma([0.6], [-0.3], proc.InnovationSpec("gaussian", 1.0))),
])
def test_fit_recovers_parameters(name, beta, model):
    fit = fit_whittle(proc.simulate(model, 8192, 3), get_family(name), advisories=False)
    np.testing.assert_allclose(fit.beta_hat, np.atleast_1d(beta), atol=0.08)


def test_boundary_hit_flag(gaussian):
    x = proc.simulate(proc.CausalLinear.arma([0.995], [], gaussian), 4096, 2)
    fit = fit_whittle(x, get_family("ar1", bound=0.9), advisories=False)
    assert fit.boundary_hit
    assert fit.beta_hat[0] == pytest.approx(0.9, abs=1e-6)


def test_common_factor_flagged_by_identifiability_advisory():
    adv = {a.condition: a for a in condition_advisories(get_family("arma11"), np.array([0.3, -0.3]))}
    assert set(adv) == {f"C{k}" for k in range(1, 8)}
    assert adv["C2"].ok is False


@given(st.floats(-0.9, 0.9))
@settings(max_examples=15, deadline=None)
def test_fit_is_deterministic(b):
    x = proc.simulate(proc.CausalLinear.arma([b], [], proc.InnovationSpec("gaussian", 1.0)), 256, 5)
    fam = get_family("ar1")
    f1 = fit_whittle(x, fam, advisories=False)
    f2 = fit_whittle(x, fam, advisories=False)
    assert f1.beta_hat[0] == f2.beta_hat[0]
    assert fam.contains(f1.beta_hat)


# ---------------------------------------------------------------- factorization


@pytest.mark.parametrize("c", [0.3, 1.0, 7.5])
def test_factorize_constant(c):
    fac = spectral_factorization(lambda lam: np.full_like(lam, c))
    assert fac.sigma2 == pytest.approx(c)
    np.testing.assert_allclose(fac.shape(np.linspace(-3, 3, 5)), 1.0)


@pytest.mark.parametrize("ar, ma", [([0.5], []), ([], [0.4]), ([0.6], [-0.3])])
def test_factorize_arma(ar, ma, gaussian):
    truth = proc.true_spectral_density(proc.CausalLinear.arma(ar, ma, gaussian))
    fac = spectral_factorization(truth)
    assert fac.sigma2 == pytest.approx(1 / TWO_PI, rel=1e-10)
    assert abs(fac.log_residual) < 1e-8


# ---------------------------------------------------------------- W*, Q*, covariance


@pytest.mark.parametrize("name, beta, expected", [
    ("ar1", 0.0, 4 * np.pi),
    ("ar1", 0.5, 16 * np.pi / 3),
    ("ma1", 0.0, 4 * np.pi),
    ("ma1", 0.4, 4 * np.pi / 0.84),
])
def test_W_star_closed_forms(name, beta, expected):
    fam = get_family(name)
    for path in ("inverse", "log"):
        assert compute_W_star(fam, np.array([beta]), path=path)[0, 0] == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("name, beta", FAMILY_POINTS)
def test_W_star_two_paths(name, beta):
    fam = family(name)
    W1 = compute_W_star(fam, np.array(beta), path="inverse")
    W2 = compute_W_star(fam, np.array(beta), path="log")
    np.testing.assert_allclose(W1, W2, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(W1, W1.T)
    assert np.all(np.linalg.eigvalsh(W1) > 0)


def test_identity_family_is_degenerate():
    fam = get_family("identity")
    assert compute_W_star(fam, np.array([0.0]))[0, 0] == 0.0
    assert compute_Q_star(fam, np.array([0.0]), 1.0)[0, 0] == 0.0
    with pytest.raises(np.linalg.LinAlgError, match="nonidentifiable"):
        asymptotic_cov(fam, np.array([0.0]), 1.0)


def test_gaussian_Q_star(gaussian):
    fam = get_family("ar1")
    s2 = 1 / TWO_PI
    W = compute_W_star(fam, np.array([0.5]))
    np.testing.assert_allclose(compute_Q_star(fam, np.array([0.5]), s2), 4 * np.pi * s2 ** 2 * W, rtol=1e-12)


@pytest.mark.parametrize("b", [0.0, 0.5, -0.8])
def test_gaussian_ar1_covariance(b):
    acov = asymptotic_cov(get_family("ar1"), np.array([b]), 1 / TWO_PI)
    assert acov.cov_beta[0, 0] == pytest.approx(1 - b * b, rel=1e-10)
    assert acov.var_sigma2 == pytest.approx(2 / TWO_PI ** 2)
    np.testing.assert_allclose(acov.cross, 0.0, atol=1e-15)


def test_uniform_ar1_covariance(uniform):
    model = proc.CausalLinear.arma([0.5], [], uniform)
    truth = proc.true_spectral_density(model)
    s2 = spectral_factorization(truth).sigma2
    acov = asymptotic_cov(get_family("ar1"), np.array([0.5]), s2, truth.f4)
    assert acov.cov_beta[0, 0] == pytest.approx(0.75, rel=1e-8)
    # sigma*^4 (2 + kappa) with kappa the innovation excess kurtosis
    assert acov.var_sigma2 == pytest.approx(s2 ** 2 * (2 + uniform.c4), rel=1e-6)
    assert abs(acov.cross[0]) < 1e-10
