"""Weak-dependence decay profiles and the moment/decay conditions under which
the limit theorems hold.

Profiles are symbolic: a kind (``theta`` or ``eta``) and a rate class.

``geometric``        O(exp(-c r^power))
``riemannian``       O(r^-exponent)
``riemannian_log``   O((r / log r)^d), stored as ``exponent = -d``
``indeterminate``    no bound available from the model description
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .processes import (
    ArchInf,
    Bilinear,
    CausalLinear,
    Garch,
    LinearDepInnov,
    TwoSidedLinear,
    Volterra,
)

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class DependenceProfile:
    kind: str
    rate: str
    exponent: float | None = None
    c: float | None = None
    power: float = 1.0
    moment_order: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.kind not in ("theta", "eta"):
            raise ValueError(f"unknown dependence kind {self.kind!r}")
        if self.rate not in ("geometric", "riemannian", "riemannian_log", "indeterminate"):
            raise ValueError(f"unknown rate class {self.rate!r}")
        if self.rate in ("riemannian", "riemannian_log") and not (self.exponent is not None and self.exponent > 0):
            raise ValueError("riemannian profiles need a positive exponent")
        if self.rate == "geometric" and not (self.c is not None and self.c > 0):
            raise ValueError("geometric profiles need c > 0")

    def describe(self) -> str:
        sym = "θ" if self.kind == "theta" else "η"
        if self.rate == "geometric":
            arg = "r" if self.power == 1 else f"r^{self.power:g}"
            return f"{sym}_r = O(exp(-{self.c:.4g} {arg}))"
        if self.rate == "riemannian":
            return f"{sym}_r = O(r^-{self.exponent:.6g})"
        if self.rate == "riemannian_log":
            return f"{sym}_r = O((r/log r)^-{self.exponent:.6g})"
        return f"{sym}_r: indeterminate"


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    threshold: float
    supplied: float | None
    passed: bool | None
    binding: str = ""

    def to_record(self) -> dict:
        return {"condition": self.condition, "threshold": self.threshold,
                "supplied": self.supplied, "pass": self.passed}


def _indeterminate(kind: str, why: str, m=None) -> DependenceProfile:
    return DependenceProfile(kind, "indeterminate", moment_order=m, note=why)


# ---------------------------------------------------------------------------
# transfer lemma
# ---------------------------------------------------------------------------


def transfer_lemma(profile: DependenceProfile, p: float, a: float) -> DependenceProfile:
    """Profile of ``h(X)`` when ``X`` is ``L^p`` and ``|h(x)-h(y)| <=
    c |x-y| (|x|^{a-1} + |y|^{a-1})``: coefficients are raised to the power
    ``(p - a) / (p - 1)``; the result is ``L^{p/a}``."""
    if not 1 <= a:
        raise ValueError("transfer lemma needs a >= 1")
    if a >= p:
        raise ValueError(f"moment deficit: a={a:g} >= p={p:g}")
    q = (p - a) / (p - 1)
    new_m = p / a
    if profile.rate == "indeterminate":
        return replace(profile, moment_order=new_m)
    if profile.rate == "geometric":
        return replace(profile, c=profile.c * q, moment_order=new_m)
    return replace(profile, exponent=profile.exponent * q, moment_order=new_m)


# ---------------------------------------------------------------------------
# profiles of the model families
# ---------------------------------------------------------------------------


def _bilinear_phi(nu2: float, c: np.ndarray) -> tuple[float, float]:
    """``delta(nu2)`` and ``nu2 delta / (delta + nu2 log 2)``."""
    j = np.arange(1, c.size + 1)
    weighted = float(np.sum(c * j ** (1.0 + nu2)))
    if weighted <= 0:
        return math.inf, nu2 / LOG2 if nu2 > 0 else 0.0
    delta = math.log1p((1.0 - float(np.abs(c).sum())) / weighted)
    return delta, nu2 * delta / (delta + nu2 * LOG2)


def _best_nu2_rate(c: np.ndarray, nu2_max: float = 60.0) -> float:
    """``sup_{nu2 > 0} nu2 delta / (delta + nu2 log 2)`` over a bracket."""
    grid = np.linspace(1e-3, nu2_max, 600)
    vals = np.array([_bilinear_phi(v, c)[1] for v in grid])
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda v: -_bilinear_phi(v, c)[1], bounds=(lo, hi), method="bounded",
                                   options=dict(xatol=1e-10))
    return max(float(-res.fun), float(vals[k]))


def _arch_level_profile(model, m: float) -> DependenceProfile:
    d = model.decay if isinstance(model, ArchInf) else None
    if d is None or d.kind in ("finite", "geometric"):
        return DependenceProfile("theta", "geometric", c=1.0, power=0.5, moment_order=m,
                                 note="constant c unspecified")
    if d.rate > 2:
        return DependenceProfile("theta", "riemannian", exponent=d.rate - 1.0, moment_order=m)
    return _indeterminate("theta", "ARCH(inf) riemannian decay needs nu > 2", m)


def derive_profile(model, m: float) -> DependenceProfile:
    """Decay profile implied by the coefficient decay tags.

    ARCH/GARCH return the profile of the squared process (after the transfer
    lemma with ``a = 2``), whose moment order is ``m / 2``.
    """
    if isinstance(model, (CausalLinear, TwoSidedLinear)):
        d = model.decay
        if d.kind == "finite":
            return DependenceProfile("eta", "geometric", c=1.0, moment_order=m, note="finite filter")
        if d.kind == "geometric":
            return DependenceProfile("eta", "geometric", c=-math.log(d.rate), moment_order=m)
        if d.rate <= 0.5:
            return _indeterminate("eta", "a_k = O(k^-a) with a <= 1/2", m)
        return DependenceProfile("eta", "riemannian", exponent=d.rate - 0.5, moment_order=m)

    if isinstance(model, (Garch, ArchInf)):
        base = _arch_level_profile(model, m)
        if base.rate == "indeterminate":
            return replace(base, moment_order=m / 2)
        return transfer_lemma(base, m, 2.0)

    if isinstance(model, Bilinear):
        d = model.decay
        if d.kind in ("finite", "geometric"):
            return DependenceProfile("theta", "geometric", c=1.0, power=0.5, moment_order=m,
                                     note="constant c unspecified")
        if np.any(model.c < 0):
            return _indeterminate("theta", "riemannian bilinear case needs c_j >= 0", m)
        nu1 = d.rate
        rate_c = _best_nu2_rate(model.c) if model.c.size and np.any(model.c) else math.inf
        exponent = min(nu1 - 1.0, rate_c)
        if not exponent > 0:
            return _indeterminate("theta", "nu1 <= 1", m)
        return DependenceProfile("theta", "riemannian_log", exponent=exponent, moment_order=m)

    if isinstance(model, Volterra):
        d = model.decay
        if d.kind in ("finite", "geometric"):
            return DependenceProfile("eta", "geometric", c=1.0, moment_order=m,
                                     note="finite support" if d.kind == "finite" else "")
        if d.rate <= 1:
            return _indeterminate("eta", "Volterra decay a <= 1", m)
        return DependenceProfile("eta", "riemannian", exponent=d.rate - 1.0, moment_order=m)

    if isinstance(model, LinearDepInnov):
        if isinstance(model.inner, (Garch, ArchInf)):
            inner = _arch_level_profile(model.inner, m)  # the filter acts on xi, not xi^2
        else:
            inner = derive_profile(model.inner, m)
        outer = model.decay
        if inner.rate == "indeterminate":
            return _indeterminate("eta", "inner profile indeterminate", m)
        if outer.kind in ("finite", "geometric"):
            if inner.rate == "geometric":
                return DependenceProfile("eta", "geometric", c=inner.c, power=inner.power, moment_order=m)
            return DependenceProfile("eta", inner.rate, exponent=inner.exponent, moment_order=m)
        a = outer.rate
        if inner.rate == "geometric" or a <= 2 or m <= 2:
            return _indeterminate("eta", "needs a > 2, m > 2 and a riemannian inner profile", m)
        b = inner.exponent
        return DependenceProfile("eta", "riemannian",
                                 exponent=b * (a - 2) * (m - 2) / ((a - 1) * (m - 1)), moment_order=m)

    raise TypeError(f"unsupported model {type(model).__name__}")


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def theorem3_alpha_threshold(m: float) -> float:
    if m <= 4:
        raise ValueError("threshold undefined: moment order m <= 4")
    return max(3.0, (2 * m - 1) / (m - 4))


def check_clt_condition(profile: DependenceProfile, m: float | None = None, s: float = 1.0) -> ConditionReport:
    """θ profiles: ``sum theta_k^{(m-4)/(m-1)} < inf``. η profiles:
    ``alpha > max(3, (2m-1)/(m-4))``. ``m`` defaults to the profile's
    moment order."""
    m = profile.moment_order if m is None else m
    if m is None:
        raise ValueError("moment order unknown: pass m")
    if s <= 0.5:
        raise ValueError("index below Sobolev embedding threshold")
    if m <= 4:
        return ConditionReport("moment order m > 4", 4.0, m, False, "moment order")
    if profile.rate == "indeterminate":
        return ConditionReport("decay", math.nan, None, None, profile.note or "indeterminate")
    if profile.kind == "theta":
        if profile.rate == "geometric":
            return ConditionReport("sum theta^((m-4)/(m-1)) < inf", 1.0, math.inf, True, "geometric")
        value = profile.exponent * (m - 4) / (m - 1)
        return ConditionReport("exponent*(m-4)/(m-1) > 1", 1.0, value, value > 1, "summability")
    thr = theorem3_alpha_threshold(m)
    if profile.rate == "geometric":
        return ConditionReport("alpha > max(3, (2m-1)/(m-4))", thr, math.inf, True, "geometric")
    binding = "alpha > 3" if thr == 3.0 else "alpha > (2m-1)/(m-4)"
    return ConditionReport("alpha > max(3, (2m-1)/(m-4))", thr, profile.exponent,
                           profile.exponent > thr, binding)


def _pole(m: float, at: float):
    if m <= at:
        raise ValueError(f"threshold undefined at m={m:g} (pole at m={at:g})")


def bilinear_nu2_threshold(c, m: float, tol: float = 1e-10, nu2_max: float = 1e3) -> dict:
    """Smallest ``nu2`` with ``nu2 > (m-4) delta / ((m-1) delta - (m-4) log 2)``
    and ``delta > log 2 (m-4)/(m-1)``, where ``delta`` depends on ``nu2``.

    Both inequalities reduce to ``nu2 delta / (delta + nu2 log 2) > (m-4)/(m-1)``;
    the left side is solved for by bisection. Returns ``{"feasible": False}``
    when no ``nu2`` in ``(0, nu2_max]`` satisfies it.
    """
    _pole(m, 4)
    c = np.asarray(c, dtype=np.float64)
    if np.any(c < 0):
        raise ValueError("riemannian bilinear case needs c_j >= 0")
    target = (m - 4) / (m - 1)
    F = lambda v: _bilinear_phi(v, c)[1] - target
    grid = np.geomspace(1e-6, nu2_max, 400)
    vals = np.array([F(v) for v in grid])
    if not np.any(vals > 0):
        return {"feasible": False, "nu2": math.nan, "delta": math.nan, "target": target}
    k = int(np.argmax(vals > 0))
    if k == 0:
        return {"feasible": True, "nu2": 0.0, "delta": _bilinear_phi(grid[0], c)[0], "target": target}
    lo, hi = grid[k - 1], grid[k]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if F(mid) > 0 else (mid, hi)
    return {"feasible": True, "nu2": hi, "delta": _bilinear_phi(hi, c)[0], "target": target}


def proposition_thresholds(family: str, m: float, **extra) -> list[ConditionReport]:
    """Decay thresholds under which the Whittle CLTs hold.

    ``family`` is one of ``arch`` (``nu``), ``bilinear`` (``nu1``, ``c``,
    ``nu2``), ``volterra`` (``a``), ``linear`` (``a``), ``linear_dep``
    (``a``, ``b``) or ``theorem3`` (``alpha``). Supplied values are compared
    strictly against the thresholds.
    """
    def rep(cond, thr, key, value=None):
        v = extra.get(key) if value is None else value
        return ConditionReport(cond, thr, v, None if v is None else bool(v > thr))

    if family == "arch":
        _pole(m, 8)
        return [rep("nu > (2m-9)/(m-8)", (2 * m - 9) / (m - 8), "nu")]
    if family == "bilinear":
        _pole(m, 4)
        out = [rep("nu1 > (2m-5)/(m-4)", (2 * m - 5) / (m - 4), "nu1")]
        if extra.get("c") is not None:
            sol = bilinear_nu2_threshold(extra["c"], m)
            if not sol["feasible"]:
                out.append(ConditionReport("nu2/delta system", math.nan, extra.get("nu2"), False, "infeasible"))
            else:
                nu2 = extra.get("nu2")
                passed = None
                if nu2 is not None:
                    passed = bool(_bilinear_phi(nu2, np.asarray(extra["c"], float))[1] > sol["target"])
                out.append(ConditionReport("nu2 > (m-4) delta / ((m-1) delta - (m-4) log 2)",
                                           sol["nu2"], nu2, passed, f"delta={sol['delta']:.6g}"))
        return out
    if family == "volterra":
        _pole(m, 4)
        return [rep("a > 4 + max(0, (11-m)/(m-4))", 4 + max(0.0, (11 - m) / (m - 4)), "a")]
    if family == "linear":
        _pole(m, 4)
        return [rep("a > max(7/2, (5m-6)/(2(m-4)))", max(3.5, (5 * m - 6) / (2 * (m - 4))), "a")]
    if family == "linear_dep":
        _pole(m, 4)
        thr = theorem3_alpha_threshold(m)
        value = None
        if extra.get("a") is not None and extra.get("b") is not None:
            a, b = extra["a"], extra["b"]
            value = b * (a - 2) * (m - 2) / ((a - 1) * (m - 1))
        return [rep("b(a-2)(m-2)/((a-1)(m-1)) > max(3, (2m-1)/(m-4))", thr, "", value)]
    if family == "theorem3":
        return [rep("alpha > max(3, (2m-1)/(m-4))", theorem3_alpha_threshold(m), "alpha")]
    raise ValueError(f"unknown family tag {family!r}")


@dataclass(frozen=True)
class RateExponent:
    lam: float
    t: float
    rate: float


def vite_rate_exponent(alpha: float, m: float, s: float) -> RateExponent:
    """Exponent of the ``n^{-rate}`` convergence rate for smooth functionals
    of ``sqrt(n)(J_n - J)`` under ``eta_r = O(r^-alpha)``.

    ``lam = (alpha(m-4) - 2m + 1) / (2(m + 1 + alpha m))``,
    ``t = min(2 alpha (m-2)/(m-1) - 1, s - 1/2)``, ``rate = t/(t+3) lam``.
    ``lam`` vanishes at ``alpha = (2m-1)/(m-4)``; below it the bound fails.
    """
    if s <= 0.5:
        raise ValueError("index below Sobolev embedding threshold")
    thr = theorem3_alpha_threshold(m)
    boundary = (2 * m - 1) / (m - 4)
    if alpha < thr and not (math.isclose(alpha, boundary, rel_tol=1e-12) and boundary >= 3):
        raise ValueError(f"condition violated: alpha={alpha:g} <= max(3, (2m-1)/(m-4)) = {thr:g}")
    lam = (alpha * (m - 4) - 2 * m + 1) / (2 * (m + 1 + alpha * m))
    if math.isclose(alpha, boundary, rel_tol=1e-12):
        lam = 0.0
    t = min(2 * alpha * (m - 2) / (m - 1) - 1, s - 0.5)
    return RateExponent(lam, t, t / (t + 3) * lam)
