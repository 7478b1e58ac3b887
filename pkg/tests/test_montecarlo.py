import numpy as np
import pytest

from wdwhittle import montecarlo as mc
from wdwhittle import processes as proc
from wdwhittle.spectral import FourierFunction

GAUSS = proc.InnovationSpec("gaussian", 1.0)
AR1 = proc.CausalLinear.arma([0.5], [], GAUSS)


@pytest.mark.parametrize("kwargs, match", [
    (dict(kind="bogus"), "kind"),
    (dict(n_grid=(512, 256)), "increasing"),
    (dict(replications=50), "at least 100"),
    (dict(kind="whittle"), "family"),
    (dict(transform="cube"), "transform"),
])
def test_config_validation(kwargs, match):
    base = dict(kind="clt_rhat", model=AR1, n_grid=(256, 512))
    with pytest.raises(ValueError, match=match):
        mc.McConfig(**(base | kwargs))


def test_transform_default_for_garch():
    cfg = mc.McConfig("whittle", proc.Garch(1.0, (0.1,), (0.2,), GAUSS), (256,), family="garch11_squared")
    assert cfg.transform == "square"
    assert mc.McConfig("ulln", AR1, (256,)).transform == "none"


def test_replicate_is_order_and_worker_independent():
    cfg1 = mc.McConfig("clt_rhat", AR1, (128,), replications=100, seed=3, lags=(0, 2))
    cfg2 = mc.McConfig("clt_rhat", AR1, (128,), replications=100, seed=3, lags=(0, 2), workers=2)
    np.testing.assert_array_equal(mc.replicate(cfg1, 128), mc.replicate(cfg2, 128))


def test_replications_use_distinct_streams():
    X = mc.replicate(mc.McConfig("clt_rhat", AR1, (64,), replications=100, seed=1, lags=(0,)), 64)
    assert np.unique(X[:, 0]).size == X.shape[0]


def test_normality_diagnostics(rng):
    d = mc.normality(rng.standard_normal(4000))
    assert d["ks_ok"] and d["skew_ok"] and d["kurt_ok"]
    d = mc.normality(rng.exponential(size=4000))
    assert not d["ks_ok"] and not d["skew_ok"]


def test_variance_se(rng):
    x = rng.standard_normal(20000) * 3
    var, se = mc.variance_se(x)
    assert var == pytest.approx(9, rel=0.05)
    assert se == pytest.approx(9 * np.sqrt(2 / 20000), rel=0.1)


def test_clt_rhat_white_noise_targets():
    wn = proc.CausalLinear([1.0], GAUSS)
    rep = mc.run(mc.McConfig("clt_rhat", wn, (2048,), replications=800, seed=7, lags=(0, 1)))
    rows = {r["lag"]: r for r in rep.rows if r["lag"] != "joint"}
    assert rows[0]["target"] == pytest.approx(2.0)
    assert rows[1]["target"] == pytest.approx(1.0)
    assert rep.passed


def test_clt_Jn_gamma_target():
    rep = mc.run(mc.McConfig("clt_Jn", AR1, (1024,), replications=300, seed=8,
                             g=(FourierFunction.cosine(1, 2.0),)))
    assert rep.rows[0]["J"] == pytest.approx(4 / 3)
    assert rep.rows[0]["rel_err"] < 0.2


def test_ulln_bound_constant():
    rep = mc.run(mc.McConfig("ulln", AR1, (256, 1024), replications=100, seed=2))
    assert rep.rows[0]["bound"] * 256 == pytest.approx(49.6, abs=0.05)
    assert rep.passed


def test_whittle_report_structure():
    rep = mc.run(mc.McConfig("whittle", AR1, (512,), replications=100, seed=4, family="ar1", beta_true=(0.5,)))
    assert [r["param"] for r in rep.rows] == ["phi1", "sigma2"]
    assert rep.summary["cov_beta"][0][0] == pytest.approx(0.75)
    csv = rep.to_csv()
    assert csv.splitlines()[0].startswith("n,")
    assert '"criteria"' in rep.to_structured()


def test_report_bytes_independent_of_workers():
    base = dict(kind="whittle", model=AR1, n_grid=(128, 256), replications=100, seed=99,
                family="ar1", beta_true=(0.5,))
    a = mc.run(mc.McConfig(**base, workers=1))
    b = mc.run(mc.McConfig(**base, workers=2))
    assert a.to_csv() == b.to_csv() and a.to_structured() == b.to_structured()
