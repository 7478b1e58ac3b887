"""Monte Carlo harness for the limit theorems.

Replication ``r`` at the ``i``-th sample size uses innovation stream
``(i << 32) | r``; replications run in ordered chunks, optionally across
worker processes, and are aggregated in replication order, so every
statistic is bitwise independent of the number of workers.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from . import processes as proc
from .spectral import (
    FourierFunction,
    c_s_constant,
    dual_norm_sq_from_rhat,
    integrated_periodogram,
    limit_covariance,
    sample_autocovariances,
    sigma_matrix,
    spectral_integral,
)
from .textio import format_structured, format_table
from .whittle import asymptotic_cov, fit_whittle, get_family, spectral_factorization

KINDS = ("ulln", "clt_rhat", "clt_Jn", "whittle")
CHUNK = 25


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo experiment.

    ``family`` names a built-in parametric family (``family_options`` are
    passed to its constructor). ``transform="square"`` fits the centered
    squared series, which is the default for ARCH/GARCH models.
    """

    kind: str
    model: object
    n_grid: tuple
    replications: int = 500
    seed: int = 0
    lags: tuple = (0, 1)
    g: tuple = ()
    s: float = 1.0
    family: str | None = None
    family_options: tuple = ()
    beta_true: tuple | None = None
    transform: str | None = None
    rtol: float = 0.15
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        grid = tuple(int(v) for v in np.atleast_1d(self.n_grid))
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid or grid[0] < 2:
            raise ValueError("n_grid must be strictly increasing sample sizes >= 2")
        object.__setattr__(self, "n_grid", grid)
        if self.replications < 100:
            raise ValueError("replications must be at least 100")
        if self.kind == "whittle" and self.family is None:
            raise ValueError("whittle experiments need a parametric family")
        if self.kind == "clt_Jn" and not self.g:
            object.__setattr__(self, "g", (FourierFunction.constant(1.0),))
        if self.transform is None:
            sq = isinstance(self.model, (proc.Garch, proc.ArchInf))
            object.__setattr__(self, "transform", "square" if sq else "none")
        if self.transform not in ("none", "square"):
            raise ValueError("transform must be 'none' or 'square'")
        object.__setattr__(self, "lags", tuple(int(v) for v in self.lags))
        object.__setattr__(self, "family_options", tuple(sorted(dict(self.family_options).items())))

    def family_obj(self):
        return _family(self.family, self.family_options)


@functools.lru_cache(maxsize=32)
def _family(name, options):
    return get_family(name, **dict(options))


@dataclass
class McReport:
    kind: str
    rows: list
    summary: dict
    criteria: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v for v in self.criteria.values() if v is not None)

    def to_csv(self) -> str:
        return format_table(self.rows)

    def to_structured(self) -> str:
        return format_structured({"kind": self.kind, "summary": self.summary, "criteria": self.criteria,
                                  "rows": self.rows})


# ---------------------------------------------------------------------------
# replication engine
# ---------------------------------------------------------------------------


def _series(cfg: McConfig, n: int, stream: int):
    ts = proc.simulate(cfg.model, n, cfg.seed, stream)
    if cfg.transform == "square":
        y = ts.values ** 2
        return proc.TimeSeries(y - y.mean())
    return ts


def _stat(cfg: McConfig, n: int, stream: int) -> np.ndarray:
    ts = _series(cfg, n, stream)
    if cfg.kind == "ulln":
        rhat = sample_autocovariances(ts)
        return np.array([dual_norm_sq_from_rhat(rhat, n, _truth(cfg), cfg.s)])
    if cfg.kind == "clt_rhat":
        rhat = sample_autocovariances(ts, max(cfg.lags))
        return rhat[list(cfg.lags)]
    if cfg.kind == "clt_Jn":
        rhat = sample_autocovariances(ts, min(max(g.L for g in cfg.g), n - 1))
        return np.array([integrated_periodogram(ts, g, rhat=rhat) for g in cfg.g])
    fit = fit_whittle(ts, cfg.family_obj(), advisories=False)
    return np.r_[fit.beta_hat, fit.sigma2_hat]


def _chunk(args) -> np.ndarray:
    cfg, n, n_index, lo, hi = args
    return np.array([_stat(cfg, n, (n_index << 32) | r) for r in range(lo, hi)])


def replicate(cfg: McConfig, n: int, n_index: int = 0) -> np.ndarray:
    """``(R, k)`` array of per-replication statistics in replication order."""
    R = cfg.replications
    tasks = [(cfg, n, n_index, lo, min(lo + CHUNK, R)) for lo in range(0, R, CHUNK)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_chunk, tasks))
    else:
        parts = [_chunk(t) for t in tasks]
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------


_TRUTH: dict = {}


def _truth(cfg: McConfig):
    key = id(cfg.model)
    hit = _TRUTH.get(key)
    if hit is None or hit[0] is not cfg.model:
        hit = _TRUTH[key] = (cfg.model, proc.true_spectral_density(cfg.model))
    return hit[1]


def variance_se(x: np.ndarray) -> tuple[float, float]:
    """Unbiased variance and its MC standard error ``sqrt((m4 - var^2)/R)``."""
    x = np.asarray(x, dtype=np.float64)
    R = x.size
    d = x - x.mean()
    var = float(np.sum(d * d) / (R - 1))
    m4 = float(np.mean(d ** 4))
    return var, math.sqrt(max(m4 - var * var, 0.0) / R)


def normality(x: np.ndarray) -> dict:
    """KS distance to the normal with matched moments, against ``1.36/sqrt(R)``,
    plus skewness and excess-kurtosis advisories."""
    x = np.asarray(x, dtype=np.float64)
    R = x.size
    sd = x.std(ddof=1)
    if sd == 0:
        return {"ks": 0.0, "ks_band": 1.36 / math.sqrt(R), "ks_ok": True, "skew": 0.0, "kurt": 0.0,
                "skew_ok": True, "kurt_ok": True}
    ks = float(stats.kstest((x - x.mean()) / sd, "norm").statistic)
    skew = float(stats.skew(x))
    kurt = float(stats.kurtosis(x))
    band = 1.36 / math.sqrt(R)
    return {"ks": ks, "ks_band": band, "ks_ok": ks < band, "skew": skew, "kurt": kurt,
            "skew_ok": abs(skew) < 0.2, "kurt_ok": abs(kurt) < 0.5}


def _rel(est: float, target: float) -> float:
    return abs(est - target) / abs(target) if target != 0 else abs(est)


def _summary(cfg: McConfig) -> dict:
    out = {"kind": cfg.kind, "model": type(cfg.model).__name__, "n_grid": list(cfg.n_grid),
           "replications": cfg.replications, "seed": cfg.seed}
    if cfg.kind == "clt_rhat":
        out["lags"] = list(cfg.lags)
    if cfg.kind in ("ulln",):
        out["s"] = cfg.s
    if cfg.kind == "whittle":
        out.update(family=cfg.family, transform=cfg.transform)
    return out


def run_ulln(cfg: McConfig) -> McReport:
    """Mean squared dual-norm distance against ``3(gamma + c_s(kappa4 + 2 gamma))/n``."""
    truth = _truth(cfg)
    if truth.kappa4_sum is None:
        raise ValueError("run_ulln needs kappa4; available for Gaussian/linear models only")
    gamma = truth.gamma
    cs = c_s_constant(cfg.s)
    rows, means = [], []
    for i, n in enumerate(cfg.n_grid):
        x = replicate(cfg, n, i)[:, 0]
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(x.size))
        bound = 3.0 * (gamma + cs * (truth.kappa4_sum + 2.0 * gamma)) / n
        means.append(mean)
        rows.append({"n": n, "statistic": "dual_norm_sq", "mean": mean, "se": se, "bound": bound,
                     "n_mean": n * mean, "within_bound": mean <= bound + 5 * se})
    monotone = all(b < a for a, b in zip(means, means[1:]))
    criteria = {"within_bound": all(r["within_bound"] for r in rows), "monotone_decay": monotone}
    summ = _summary(cfg) | {"gamma": gamma, "kappa4": truth.kappa4_sum, "c_s": cs}
    return McReport("ulln", rows, summ, criteria)


def run_clt_rhat(cfg: McConfig) -> McReport:
    """``n Var(R̂_n(l))`` against ``sigma_l^2 = sigma_{l,l}``; joint covariance
    against the ``sigma_{k,l}`` matrix; the variance bound ``kappa4 + 2 gamma``."""
    truth = _truth(cfg)
    Sigma = sigma_matrix(truth, cfg.lags) if truth.kappa4 is not None else None
    bound = truth.kappa4_sum + 2.0 * truth.gamma if truth.kappa4_sum is not None else None
    rows = []
    crit = {}
    for i, n in enumerate(cfg.n_grid):
        X = replicate(cfg, n, i)
        for j, lag in enumerate(cfg.lags):
            var, se = variance_se(X[:, j])
            target = float(Sigma[j, j]) if Sigma is not None else None
            norm = normality(X[:, j])
            row = {"n": n, "lag": lag, "mean": float(X[:, j].mean()), "true_R": float(truth.R(lag)),
                   "n_var": n * var, "n_var_se": n * se, "target": target,
                   "rel_err": _rel(n * var, target) if target is not None else None,
                   "lemma_bound": bound,
                   "within_lemma_bound": None if bound is None else n * var <= bound + 5 * n * se}
            row.update(norm)
            rows.append(row)
        if Sigma is not None and len(cfg.lags) > 1:
            C = np.cov(X, rowvar=False) * n
            rows.append({"n": n, "lag": "joint", "max_abs_cov_err": float(np.max(np.abs(C - Sigma)))})
    last = [r for r in rows if r["n"] == cfg.n_grid[-1] and r["lag"] != "joint"]
    if Sigma is not None:
        crit["n_var_within_rtol"] = all(r["rel_err"] <= cfg.rtol for r in last)
    crit["normality_ks"] = all(r["ks_ok"] for r in last)
    if bound is not None:
        crit["lemma_bound"] = all(r["within_lemma_bound"] for r in rows if r["lag"] != "joint")
    summ = _summary(cfg) | {"gamma": truth.gamma, "kappa4": truth.kappa4_sum}
    if Sigma is not None:
        summ["sigma_matrix"] = Sigma.tolist()
    return McReport("clt_rhat", rows, summ, crit)


def run_clt_Jn(cfg: McConfig) -> McReport:
    """``n Var(J_n(g))`` against ``Gamma(g, g)`` and the mean against ``J(g)``."""
    truth = _truth(cfg)
    gs = list(cfg.g)
    Gamma = np.array([[limit_covariance(a, b, truth) for b in gs] for a in gs])
    J = [spectral_integral(g, truth)[0] for g in gs]
    rows = []
    for i, n in enumerate(cfg.n_grid):
        X = replicate(cfg, n, i)
        for j in range(len(gs)):
            var, se = variance_se(X[:, j])
            row = {"n": n, "g": j, "mean": float(X[:, j].mean()), "J": J[j], "n_var": n * var,
                   "n_var_se": n * se, "target": float(Gamma[j, j]),
                   "rel_err": _rel(n * var, float(Gamma[j, j]))}
            row.update(normality(X[:, j]))
            rows.append(row)
    last = [r for r in rows if r["n"] == cfg.n_grid[-1]]
    crit = {"n_var_within_rtol": all(r["rel_err"] <= cfg.rtol or r["target"] == 0 for r in last),
            "normality_ks": all(r["ks_ok"] for r in last)}
    return McReport("clt_Jn", rows, _summary(cfg) | {"Gamma": Gamma.tolist()}, crit)


def whittle_targets(cfg: McConfig):
    """``(beta*, sigma*^2, AsymptoticCov or None, note)`` for a Whittle experiment."""
    fam = cfg.family_obj()
    truth = _truth(cfg)
    fac = spectral_factorization(truth)
    if cfg.beta_true is not None:
        beta = np.asarray(cfg.beta_true, dtype=np.float64)
    elif isinstance(cfg.model, proc.Garch) and fam.name == "garch11_squared":
        beta = np.array([cfg.model.a[0], cfg.model.c[0]])
    else:
        raise ValueError("beta_true is required for this model/family pair")
    note = ""
    f4 = None if cfg.model.innovation.c4 == 0 and _gaussian(cfg.model) else truth.f4
    if f4 is None and truth.kappa4 is None and not _gaussian(cfg.model):
        note = "f4 unavailable: targets use the Gaussian part of Q* only"
    try:
        acov = asymptotic_cov(fam, beta, fac.sigma2, f4)
    except np.linalg.LinAlgError as exc:
        acov, note = None, str(exc)
    return beta, fac.sigma2, acov, note


def _gaussian(model) -> bool:
    return model.innovation.distribution == "gaussian" and isinstance(
        model, (proc.CausalLinear, proc.TwoSidedLinear))


def run_whittle_mc(cfg: McConfig) -> McReport:
    """Bias, ``n Cov(beta_hat)``, ``n Var(sigma2_hat)`` and 95% coverage against
    the asymptotic covariance."""
    beta, sigma2, acov, note = whittle_targets(cfg)
    p = beta.size
    z = stats.norm.ppf(0.975)
    rows = []
    medians = []
    for i, n in enumerate(cfg.n_grid):
        X = replicate(cfg, n, i)
        B, S = X[:, :p], X[:, p]
        err = np.abs(B - beta)
        medians.append(float(np.median(np.linalg.norm(B - beta, axis=1))))
        for j in range(p):
            var, se = variance_se(B[:, j])
            target = float(acov.cov_beta[j, j]) if acov is not None else None
            row = {"n": n, "param": cfg.family_obj().param_names[j], "true": float(beta[j]),
                   "mean": float(B[:, j].mean()), "bias": float(B[:, j].mean() - beta[j]),
                   "median_abs_err": float(np.median(err[:, j])), "n_var": n * var, "n_var_se": n * se,
                   "target": target, "rel_err": None if target is None else _rel(n * var, target)}
            if target is not None:
                row["coverage"] = float(np.mean(err[:, j] <= z * math.sqrt(target / n)))
            row.update(normality(B[:, j]))
            rows.append(row)
        var, se = variance_se(S)
        target = acov.var_sigma2 if acov is not None else None
        row = {"n": n, "param": "sigma2", "true": sigma2, "mean": float(S.mean()), "bias": float(S.mean() - sigma2),
               "median_abs_err": float(np.median(np.abs(S - sigma2))), "n_var": n * var, "n_var_se": n * se,
               "target": target, "rel_err": None if target is None else _rel(n * var, target)}
        row.update(normality(S))
        rows.append(row)
    crit = {"median_error_decreasing": all(b < a for a, b in zip(medians, medians[1:]))
            if len(medians) > 1 else None}
    if acov is not None and not note:
        last = [r for r in rows if r["n"] == cfg.n_grid[-1] and r["param"] != "sigma2"]
        crit["n_var_within_rtol"] = all(r["rel_err"] <= cfg.rtol for r in last)
        crit["coverage_92_98"] = all(0.92 <= r["coverage"] <= 0.98 for r in last)
    summ = _summary(cfg) | {"beta_true": beta.tolist(), "sigma2_true": sigma2,
                            "median_norm_error": medians, "note": note}
    if acov is not None:
        summ.update(cov_beta=acov.cov_beta.tolist(), var_sigma2=acov.var_sigma2, cross=acov.cross.tolist())
    return McReport("whittle", rows, summ, crit)


RUNNERS = {"ulln": run_ulln, "clt_rhat": run_clt_rhat, "clt_Jn": run_clt_Jn, "whittle": run_whittle_mc}


def run(cfg: McConfig) -> McReport:
    return RUNNERS[cfg.kind](cfg)
