"""Numbered acceptance criteria.

Each test prints ``CRITERION k: PASS|FAIL <detail>``; the lines are also
collected into the terminal summary. Run standalone with
``pytest tests/test_acceptance.py -v``.
"""
import math

import numpy as np
import pytest
import sympy as sp

from wdwhittle import dependence as dep
from wdwhittle import montecarlo as mc
from wdwhittle import processes as proc
from wdwhittle.spectral import (
    FourierFunction,
    c_s_constant,
    integrated_periodogram,
    sigma_ell,
    sigma_matrix,
)
from wdwhittle.whittle import (
    compute_Q_star,
    compute_W_star,
    get_family,
    spectral_factorization,
)

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

GAUSS = proc.InnovationSpec("gaussian", 1.0)
AR1 = proc.CausalLinear.arma([0.5], [], GAUSS)
SIGMA2_STAR = 1.0 / (2 * math.pi)


def report(log, k: int, ok: bool, detail: str) -> bool:
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    log.append(line)
    return ok


@pytest.fixture(scope="module")
def ar1_whittle():
    cfg = mc.McConfig("whittle", AR1, (4096,), replications=1000, seed=101, family="ar1", beta_true=(0.5,))
    return mc.run(cfg)


def test_criterion_1_ar1_whittle_clt(ar1_whittle, acceptance_log):
    row = next(r for r in ar1_whittle.rows if r["param"] != "sigma2")
    ok = (abs(row["mean"] - 0.5) <= 0.01 and abs(row["n_var"] - 0.75) <= 0.15 * 0.75
          and 0.92 <= row["coverage"] <= 0.98)
    assert report(acceptance_log, 1, ok,
                  f"mean={row['mean']:.5f} (0.5±0.01) n·Var={row['n_var']:.4f} (0.75±15%) "
                  f"coverage={row['coverage']:.3f} [0.92,0.98]")


def test_criterion_2_ma1_whittle_clt(acceptance_log):
    model = proc.CausalLinear.arma([], [0.4], GAUSS)
    cfg = mc.McConfig("whittle", model, (4096,), replications=1000, seed=202, family="ma1", beta_true=(0.4,))
    row = next(r for r in mc.run(cfg).rows if r["param"] != "sigma2")
    ok = abs(row["n_var"] - 0.84) <= 0.15 * 0.84
    assert report(acceptance_log, 2, ok,
                  f"mean={row['mean']:.5f} n·Var={row['n_var']:.4f} (0.84±15%) coverage={row['coverage']:.3f}")


def test_criterion_3_sigma2_clt(ar1_whittle, acceptance_log):
    row = next(r for r in ar1_whittle.rows if r["param"] == "sigma2")
    target = 2 * SIGMA2_STAR ** 2
    se_mean = math.sqrt(row["n_var"] / 4096 / 1000)
    centered = abs(row["mean"] - SIGMA2_STAR) <= 4 * se_mean
    ok = abs(row["n_var"] - target) <= 0.25 * target and centered
    assert report(acceptance_log, 3, ok,
                  f"n·Var(σ̂²)={row['n_var']:.6f} (2σ*⁴={target:.6f} ±25%) "
                  f"mean-σ*²={row['mean'] - SIGMA2_STAR:+.2e} (4se={4 * se_mean:.1e})")


def test_criterion_4_rhat_clt_white_noise(acceptance_log):
    wn = proc.CausalLinear([1.0], GAUSS)
    rep = mc.run(mc.McConfig("clt_rhat", wn, (4096,), replications=4000, seed=404, lags=(0, 1)))
    r0, r1 = (next(r for r in rep.rows if r["lag"] == k) for k in (0, 1))
    ok = (abs(r0["n_var"] - 2.0) <= 0.2 and abs(r1["n_var"] - 1.0) <= 0.1
          and r0["ks_ok"] and r1["ks_ok"])
    assert report(acceptance_log, 4, ok,
                  f"n·Var(R̂0)={r0['n_var']:.4f} (2±10%) n·Var(R̂1)={r1['n_var']:.4f} (1±10%) "
                  f"KS={r0['ks']:.4f},{r1['ks']:.4f} < {r0['ks_band']:.4f}")


def test_criterion_5_ulln_dual_norm_bound(acceptance_log):
    rep = mc.run(mc.McConfig("ulln", AR1, (256, 1024, 4096), replications=500, seed=505, s=1.0))
    gamma = (1 + 0.25) / (1 - 0.25) ** 3  # sum_k R(k)^2 for AR(1), s^2 = 1
    const = 3 * (gamma + c_s_constant(1.0) * 2 * gamma)
    means = [r["mean"] for r in rep.rows]
    monotone = all(b < a for a, b in zip(means, means[1:]))
    within = all(r["mean"] <= const / r["n"] for r in rep.rows)
    ok = monotone and within and abs(const - 49.6) < 0.1
    detail = " ".join(f"n={r['n']}:{r['mean'] * r['n']:.2f}/n" for r in rep.rows)
    assert report(acceptance_log, 5, ok, f"{detail} bound={const:.2f}/n monotone={monotone}")


def test_criterion_6_lemma_variance_bound(acceptance_log):
    lags = tuple(range(11))
    rep = mc.run(mc.McConfig("clt_rhat", AR1, (4096,), replications=1000, seed=606, lags=lags))
    rows = [r for r in rep.rows if r["lag"] != "joint"]
    worst = max(rows, key=lambda r: r["n_var"])
    bound = rows[0]["lemma_bound"]
    ok = all(r["n_var"] <= bound + 5 * r["n_var_se"] for r in rows)
    assert report(acceptance_log, 6, ok,
                  f"max_l n·Var(R̂l)={worst['n_var']:.4f} (lag {worst['lag']}, se {worst['n_var_se']:.3f}) "
                  f"≤ κ4+2γ={bound:.4f}")


def test_criterion_7_qstar_f4_vanishes(acceptance_log):
    model = proc.CausalLinear.arma([0.5], [], proc.InnovationSpec("uniform", 1.0))
    f4 = proc.true_spectral_density(model).f4
    fam = get_family("ar1")
    s2 = spectral_factorization(proc.true_spectral_density(model)).sigma2
    q = compute_Q_star(fam, np.array([0.5]), s2, f4, parts=True)
    W = compute_W_star(fam, np.array([0.5]))
    ref = float(2 * s2 ** 2 * W[0, 0])
    rel = abs(float(q.f4_part[0, 0])) / ref
    assert report(acceptance_log, 7, rel < 1e-6, f"|f4 term|/(2σ*⁴W*)={rel:.2e} < 1e-6")


def test_criterion_8_parseval_consistency(acceptance_log):
    truth = proc.true_spectral_density(proc.CausalLinear.arma([0.5], [], proc.InnovationSpec("uniform", 1.0)))
    S = sigma_matrix(truth, range(4))
    e_sigma = max(abs(sigma_ell(truth, l) - S[l, l]) / abs(S[l, l]) for l in range(4))

    x = proc.simulate(AR1, 2048, 8)
    g = FourierFunction.from_dict({0: 1.0, 1: 0.3, -1: 0.3, 3: -0.2, -3: -0.2})
    a = integrated_periodogram(x, g, method="coefficient")
    b = integrated_periodogram(x, g, method="quadrature")
    e_jn = abs(a - b) / max(abs(a), 1e-300)

    e_w, e_fac = 0.0, 0.0
    for name, beta in [("ar1", [0.5]), ("ma1", [0.4]), ("arma11", [0.5, 0.2]), ("arp", [0.3, -0.2])]:
        fam = get_family(name, p=2) if name == "arp" else get_family(name)
        beta = np.array(beta)
        W1, W2 = compute_W_star(fam, beta, path="inverse"), compute_W_star(fam, beta, path="log")
        e_w = max(e_w, float(np.max(np.abs(W1 - W2)) / np.max(np.abs(W1))))
        e_fac = max(e_fac, abs(fam.log_integral(beta)))
    model_fac = spectral_factorization(truth).log_residual
    e_fac = max(e_fac, abs(model_fac))
    ok = e_sigma < 1e-6 and e_jn < 1e-8 and e_w < 1e-8 and e_fac < 1e-8
    assert report(acceptance_log, 8, ok,
                  f"σℓ² {e_sigma:.1e}<1e-6 J_n {e_jn:.1e}<1e-8 W* {e_w:.1e}<1e-8 log-residual {e_fac:.1e}<1e-8")


def test_criterion_9_garch_squared_consistency(acceptance_log):
    model = proc.Garch(1.0, (0.1,), (0.2,), GAUSS)
    rep = mc.run(mc.McConfig("whittle", model, (2 ** 12, 2 ** 14), replications=200, seed=909,
                             family="garch11_squared"))
    med = rep.summary["median_norm_error"]
    ok = bool(rep.criteria["median_error_decreasing"])
    assert report(acceptance_log, 9, ok, f"median |β̂-β*|: n=4096 {med[0]:.4f} -> n=16384 {med[1]:.4f}")


def test_criterion_10_threshold_algebra(acceptance_log):
    m, a, s_ = sp.symbols("m alpha s", positive=True)
    prop1 = (2 * m - 9) / (m - 8)
    prop4 = sp.Max(sp.Rational(7, 2), (5 * m - 6) / (2 * (m - 4)))
    thm3 = sp.Max(3, (2 * m - 1) / (m - 4))
    lam = (a * (m - 4) - 2 * m + 1) / (2 * (m + 1 + a * m))
    t = sp.Min(2 * a * (m - 2) / (m - 1) - 1, s_ - sp.Rational(1, 2))
    rate = sp.nsimplify((t / (t + 3) * lam).subs({a: 10, m: 8, s_: 1}))
    sym = [prop1.subs(m, 9), prop4.subs(m, 8), thm3.subs(m, 8)]
    got = [dep.proposition_thresholds("arch", 9)[0].threshold,
           dep.proposition_thresholds("linear", 8)[0].threshold,
           dep.theorem3_alpha_threshold(8)]
    r = dep.vite_rate_exponent(10, 8, 1).rate
    ok = (all(abs(float(x) - y) < 1e-12 for x, y in zip(sym, got))
          and [float(x) for x in sym] == [9.0, 4.25, 3.75]
          and abs(r - 0.02006) <= 1e-5 and abs(r - float(rate)) < 1e-12)
    assert report(acceptance_log, 10, ok,
                  f"Prop1(m=9)={got[0]:g} Prop4(m=8)={got[1]:g} Thm3(m=8)={got[2]:g} "
                  f"rate={r:.8f} (sympy {rate})")


def test_criterion_11_worker_determinism(acceptance_log):
    model = proc.Bilinear(1.0, [0.2], [0.3], proc.InnovationSpec("uniform", 1.0))
    base = dict(kind="clt_rhat", model=model, n_grid=(256, 512), replications=120, seed=1111, lags=(0, 1))
    outs = []
    for w in (1, 2, 3):
        rep = mc.run(mc.McConfig(**base, workers=w))
        outs.append((rep.to_csv().encode(), rep.to_structured().encode()))
    wbase = dict(kind="whittle", model=AR1, n_grid=(256,), replications=100, seed=1112,
                 family="ar1", beta_true=(0.5,))
    wouts = [mc.run(mc.McConfig(**wbase, workers=w)).to_csv().encode() for w in (1, 2)]
    ok = outs[0] == outs[1] == outs[2] and wouts[0] == wouts[1]
    assert report(acceptance_log, 11, ok, "reports byte-identical for workers ∈ {1,2,3}")
