"""Whittle contrast and estimator, spectral factorization, and the
asymptotic covariance of the Whittle estimators."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .spectral import (
    TWO_PI,
    FourierFunction,
    SpectralDensity,
    as_series,
    integrated_periodogram,
    sample_autocovariances,
    sobolev_norm,
    spectral_integral,
)

COEF_RTOL = 1e-15
MAX_GRID = 1 << 20


def _grid(N: int) -> np.ndarray:
    return TWO_PI * np.arange(N) / N


def fourier_coeffs(fn: Callable[[np.ndarray], np.ndarray], N: int = 4096,
                   s: float = 1.0, rtol: float = COEF_RTOL) -> FourierFunction:
    """Fourier coefficients of a smooth periodic function, doubling the grid
    until the upper half of the spectrum is below ``rtol`` relative to the
    largest coefficient (round-off level by default)."""
    while True:
        c = np.fft.fft(fn(_grid(N))) / N
        mag = np.abs(c)
        top = mag.max()
        k = np.minimum(np.arange(N), N - np.arange(N))
        if mag[k >= N // 4].max(initial=0.0) <= rtol * max(top, 1e-300) or N >= MAX_GRID:
            break
        N *= 2
    if N >= MAX_GRID and mag[k >= N // 4].max(initial=0.0) > 1e-10 * max(top, 1e-300):
        raise RuntimeError("Fourier coefficients of g^-1 do not decay; is g bounded away from 0?")
    significant = np.nonzero(mag > rtol * max(top, 1e-300))[0]
    L = int(k[significant].max()) if significant.size else 0
    L = min(L, N // 4)
    ell = np.arange(-L, L + 1)
    coeffs = c[ell % N]
    coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))  # exact Hermitian symmetry
    return FourierFunction(coeffs, s)


def _poly_dlog(poly_coeffs: np.ndarray, lam: np.ndarray, sign: float) -> np.ndarray:
    """``d log |P(e^{i lam})|^2 / d p_j = 2 Re(e^{i j lam} / P)`` for
    ``P(z) = 1 + sign * sum p_j z^j``; rows ``j = 1..len``."""
    z = np.exp(1j * lam)
    j = np.arange(1, poly_coeffs.size + 1)
    P = 1.0 + sign * (np.power.outer(z, j) @ poly_coeffs)
    return sign * 2.0 * np.real(np.power.outer(z, j).T / P)


def _abs2_poly(poly: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``|sum_k poly_k e^{i k lam}|^2``."""
    z = np.exp(1j * lam)
    return np.abs(np.power.outer(z, np.arange(poly.size)) @ poly) ** 2


def _trig_poly_coeffs(poly: np.ndarray, s: float) -> FourierFunction:
    """Exact coefficients of ``|sum_k poly_k e^{i k lam}|^2``."""
    return FourierFunction(np.correlate(poly, poly, mode="full"), s)


def _rational_coeffs(num: np.ndarray, r: float, s: float = 1.0) -> FourierFunction:
    """Coefficients of ``|N(e^{i lam})|^2 / |1 - r e^{i lam}|^2`` for ``|r| < 1``,
    using ``1/|1 - r z|^2 = sum_l r^|l| z^l / (1 - r^2)``; truncated where
    ``|r|^L`` falls below 1e-17."""
    if not abs(r) < 1:
        raise ValueError("denominator root on or inside the unit circle")
    L = 0 if r == 0 else int(math.ceil(math.log(1e-17) / math.log(abs(r))))
    ell = np.arange(-L, L + 1)
    geo = np.power(r, np.abs(ell)) / (1.0 - r * r)
    return FourierFunction(np.convolve(np.correlate(num, num, mode="full"), geo), s)


@dataclass(frozen=True, eq=False)
class ParametricFamily:
    """``beta -> g_beta``, a normalized spectral shape on a box ``K``.

    ``shape_fn(beta, lam)`` returns ``g_beta(lam) > 0``; ``dlog_fn(beta, lam)``
    returns the ``(p, len(lam))`` array of ``d log g_beta / d beta_i``. When
    ``dlog_fn`` is absent, central differences with step ``fd_step`` times the
    box width are used. ``inv_coeffs_fn`` may supply exact Fourier
    coefficients of ``1 / g_beta``.
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    shape_fn: Callable
    dlog_fn: Callable | None = None
    inv_coeffs_fn: Callable | None = None
    param_names: tuple = ()
    fd_step: float = 1e-5
    sobolev_index: float = 1.0

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("region K must be a nonempty box")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if not self.param_names:
            object.__setattr__(self, "param_names", tuple(f"beta{i + 1}" for i in range(lo.size)))

    @property
    def p(self) -> int:
        return self.lower.size

    def _beta(self, beta) -> np.ndarray:
        b = np.atleast_1d(np.asarray(beta, dtype=np.float64))
        if b.shape != (self.p,):
            raise ValueError(f"{self.name} expects {self.p} parameters, got {b.size}")
        return b

    def contains(self, beta, closed: bool = True) -> bool:
        b = self._beta(beta)
        if closed:
            return bool(np.all(b >= self.lower) and np.all(b <= self.upper))
        return bool(np.all(b > self.lower) and np.all(b < self.upper))

    def shape(self, beta, lam) -> np.ndarray:
        return np.asarray(self.shape_fn(self._beta(beta), np.asarray(lam, dtype=np.float64)))

    def inv_shape(self, beta, lam) -> np.ndarray:
        g = self.shape(beta, lam)
        if np.any(~(g > 0)):
            raise ValueError(f"g_beta is not positive at beta={list(self._beta(beta))}")
        return 1.0 / g

    def dlog(self, beta, lam) -> np.ndarray:
        b = self._beta(beta)
        lam = np.asarray(lam, dtype=np.float64)
        if self.dlog_fn is not None:
            return np.asarray(self.dlog_fn(b, lam)).reshape(self.p, -1)
        out = np.empty((self.p, lam.size))
        for i in range(self.p):
            h = self.fd_step * (self.upper[i] - self.lower[i])
            e = np.zeros(self.p)
            e[i] = h
            out[i] = (np.log(self.shape(b + e, lam)) - np.log(self.shape(b - e, lam))).ravel() / (2 * h)
        return out

    def dinv_shape(self, beta, lam) -> np.ndarray:
        """``d g_beta^{-1} / d beta_i = -g_beta^{-1} d log g_beta / d beta_i``."""
        return -self.dlog(beta, lam) * self.inv_shape(beta, lam).ravel()

    def inv_coeffs(self, beta) -> FourierFunction:
        b = self._beta(beta)
        return _cached_inv(self, tuple(b))

    def dinv_coeffs(self, beta) -> list[FourierFunction]:
        b = self._beta(beta)
        return [fourier_coeffs(lambda lam, i=i: self.dinv_shape(b, lam)[i], s=self.sobolev_index)
                for i in range(self.p)]

    def d2inv_coeffs(self, beta) -> list[list[FourierFunction]]:
        """Second derivatives by central differences of the first."""
        b = self._beta(beta)
        out = []
        for i in range(self.p):
            h = self.fd_step * (self.upper[i] - self.lower[i]) * 10
            e = np.zeros(self.p)
            e[i] = h
            row = []
            for j in range(self.p):
                fn = lambda lam, j=j: (self.dinv_shape(b + e, lam)[j] - self.dinv_shape(b - e, lam)[j]) / (2 * h)
                row.append(fourier_coeffs(fn, s=self.sobolev_index, rtol=1e-7))
            out.append(row)
        return out

    def log_integral(self, beta, N: int = 8192) -> float:
        """``∫ log g_beta`` by the trapezoid rule (exact for trigonometric data)."""
        return float(np.mean(np.log(self.shape(beta, _grid(N)))) * TWO_PI)


@functools.lru_cache(maxsize=4096)
def _cached_inv(family: ParametricFamily, beta: tuple) -> FourierFunction:
    b = np.array(beta)
    if family.inv_coeffs_fn is not None:
        return family.inv_coeffs_fn(b).with_index(family.sobolev_index)
    family.inv_shape(b, _grid(64))  # positivity check
    return fourier_coeffs(lambda lam: family.inv_shape(b, lam), s=family.sobolev_index)


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations to AR coefficients
    (complex input allowed, for complex-step differentiation)."""
    phi = np.zeros(0, dtype=r.dtype)
    for k, rk in enumerate(r):
        phi = np.concatenate([phi - rk * phi[::-1], [rk]])
    return phi


def ar_family(p: int = 1, bound: float = 0.98) -> ParametricFamily:
    """AR(p) shape ``|1 - sum phi_j e^{ij lam}|^{-2}``.

    For ``p = 1`` the parameter is ``phi_1``. For ``p > 1`` the parameters are
    the partial autocorrelations, so that the box ``(-bound, bound)^p`` maps
    onto causal AR polynomials and the normalization holds on all of ``K``.
    """
    if p == 1:
        to_phi = lambda b: b
        jac = lambda b: np.eye(1)
        names = ("phi1",)
    else:
        to_phi = _pacf_to_ar
        names = tuple(f"pacf{i + 1}" for i in range(p))

        def jac(b):
            J = np.empty((p, p))
            for i in range(p):
                e = np.zeros(p, dtype=complex)
                e[i] = 1e-30j
                J[:, i] = _pacf_to_ar(b + e).imag / 1e-30
            return J

    def shape(b, lam):
        return 1.0 / _abs2_poly(np.r_[1.0, -to_phi(b)], lam)

    def dlog(b, lam):
        d_phi = -_poly_dlog(to_phi(b), lam, -1.0)  # d log g / d phi_j
        return jac(b).T @ d_phi

    def inv(b):
        return _trig_poly_coeffs(np.r_[1.0, -to_phi(b)], 1.0)

    return ParametricFamily("ar1" if p == 1 else f"ar{p}", -bound * np.ones(p), bound * np.ones(p),
                            shape, dlog, inv, names)


def ma1_family(bound: float = 0.98) -> ParametricFamily:
    """MA(1) shape ``|1 + theta e^{i lam}|^2``."""

    def shape(b, lam):
        return _abs2_poly(np.r_[1.0, b[0]], lam)

    def dlog(b, lam):
        return _poly_dlog(b, lam, 1.0)

    def inv(b):
        return _rational_coeffs(np.ones(1), -b[0])

    return ParametricFamily("ma1", [-bound], [bound], shape, dlog, inv, ("theta1",))


def arma11_family(bound: float = 0.95) -> ParametricFamily:
    """ARMA(1,1) shape ``|1 + theta e^{i lam}|^2 / |1 - phi e^{i lam}|^2``,
    ``beta = (phi, theta)``."""

    def shape(b, lam):
        return _abs2_poly(np.r_[1.0, b[1]], lam) / _abs2_poly(np.r_[1.0, -b[0]], lam)

    def dlog(b, lam):
        return np.vstack([-_poly_dlog(b[:1], lam, -1.0), _poly_dlog(b[1:], lam, 1.0)])

    def inv(b):
        return _rational_coeffs(np.r_[1.0, -b[0]], -b[1])

    return ParametricFamily("arma11", [-bound, -bound], [bound, bound], shape, dlog, inv, ("phi1", "theta1"))


def garch11_squared_family(a_max: float = 0.45, c_max: float = 0.5, a_min: float = 1e-3) -> ParametricFamily:
    """Shape of the squared GARCH(1,1) process with unit ``E xi^2``:
    ``|1 - c e^{i lam}|^2 / |1 - (a + c) e^{i lam}|^2``, ``beta = (a, c)``."""

    def shape(b, lam):
        a, c = b
        return _abs2_poly(np.r_[1.0, -c], lam) / _abs2_poly(np.r_[1.0, -(a + c)], lam)

    def dlog(b, lam):
        a, c = b
        d_ac = -_poly_dlog(np.r_[a + c], lam, -1.0)[0]  # d/d(a+c) of -log|1-(a+c)z|^2
        d_c = _poly_dlog(np.r_[c], lam, -1.0)[0]        # d/dc of log|1-cz|^2
        return np.vstack([d_ac, d_ac + d_c])

    def inv(b):
        return _rational_coeffs(np.r_[1.0, -(b[0] + b[1])], b[1])

    return ParametricFamily("garch11_squared", [a_min, 0.0], [a_max, c_max], shape, dlog, inv, ("a1", "c1"))


def identity_family() -> ParametricFamily:
    """Degenerate one-parameter family with ``g_beta = 1``."""
    return ParametricFamily("identity", [-1.0], [1.0], lambda b, lam: np.ones_like(lam),
                            lambda b, lam: np.zeros((1, np.size(lam))),
                            lambda b: FourierFunction.constant(1.0), ("dummy",))


FAMILIES = {
    "ar1": lambda **kw: ar_family(1, **kw),
    "arp": ar_family,
    "ma1": ma1_family,
    "arma11": arma11_family,
    "garch11_squared": garch11_squared_family,
    "identity": identity_family,
}


def get_family(name: str, **kw) -> ParametricFamily:
    try:
        return FAMILIES[name](**kw)
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


# ---------------------------------------------------------------------------
# contrast and estimator
# ---------------------------------------------------------------------------


def whittle_contrast(ts, family: ParametricFamily, beta, center: bool = False,
                     rhat: np.ndarray | None = None) -> float:
    """``U_n(beta) = J_n(g_beta^{-1})`` on the exact coefficient path."""
    ts = as_series(ts, center)
    g_inv = family.inv_coeffs(beta)
    if rhat is None:
        rhat = sample_autocovariances(ts, min(g_inv.L, ts.n - 1))
    val = integrated_periodogram(ts, g_inv, rhat=rhat)
    if not math.isfinite(val):
        raise ValueError(f"non-finite contrast at beta={list(np.atleast_1d(beta))}")
    return val


def population_contrast(family: ParametricFamily, beta, model: SpectralDensity) -> float:
    """``J(g_beta^{-1}) = ∫ f / g_beta``; minimized at the true parameter."""
    return spectral_integral(family.inv_coeffs(beta), model)[0]


@dataclass(frozen=True)
class Advisory:
    condition: str
    ok: bool
    value: float
    note: str = ""


@dataclass(frozen=True)
class WhittleFit:
    beta_hat: np.ndarray
    sigma2_hat: float
    contrast: float
    iterations: int
    converged: bool
    boundary_hit: bool
    trace: tuple = ()
    advisories: tuple = ()
    family: str = ""

    def to_record(self) -> dict:
        rec = {"family": self.family}
        for i, v in enumerate(np.atleast_1d(self.beta_hat)):
            rec[f"beta_hat_{i + 1}"] = float(v)
        rec.update(sigma2_hat=self.sigma2_hat, contrast=self.contrast, iterations=self.iterations,
                   converged=self.converged, boundary_hit=self.boundary_hit)
        for a in self.advisories:
            rec[f"{a.condition}_ok"] = a.ok
        return rec


def _start_grid(family: ParametricFamily) -> np.ndarray:
    p = family.p
    if p <= 3:
        axes = [family.lower[i] + (family.upper[i] - family.lower[i]) * np.arange(1, 6) / 6 for i in range(p)]
        return np.array(np.meshgrid(*axes, indexing="ij")).reshape(p, -1).T
    unit = stats.qmc.Halton(p, scramble=False).random(126)[1:]
    return family.lower + unit * (family.upper - family.lower)


def fit_whittle(ts, family: ParametricFamily, center: bool = False, n_starts: int = 3,
                rtol: float = 1e-9, maxiter: int = 2000, advisories: bool = True) -> WhittleFit:
    """Minimize ``U_n`` over the box ``K``.

    The contrast is evaluated on a ``5^min(p,3)``-point grid (a Halton set for
    ``p > 3``); bounded Nelder-Mead is then run from the ``n_starts`` best grid
    points and the best local optimum is kept.
    """
    ts = as_series(ts, center)
    rhat = sample_autocovariances(ts, ts.n - 1)

    def U(beta):
        return whittle_contrast(ts, family, np.clip(beta, family.lower, family.upper), rhat=rhat)

    starts = _start_grid(family)
    values = np.array([U(b) for b in starts])
    order = np.argsort(values, kind="stable")[:n_starts]
    width = family.upper - family.lower
    trace = []
    best = None
    total_iter = 0
    for idx in order:
        x0 = starts[idx]
        simplex = np.vstack([x0] + [x0 + np.where(np.arange(family.p) == i, 0.1 * width, 0.0)
                                    * (1 if x0[i] + 0.1 * width[i] <= family.upper[i] else -1)
                                    for i in range(family.p)])
        res = optimize.minimize(
            U, x0, method="Nelder-Mead", bounds=optimize.Bounds(family.lower, family.upper),
            options=dict(xatol=1e-9 * width.max(), fatol=rtol * abs(values[idx]), maxiter=maxiter,
                         initial_simplex=simplex))
        total_iter += int(res.nit)
        trace.append(dict(start=x0.tolist(), beta=np.asarray(res.x).tolist(), contrast=float(res.fun),
                          iterations=int(res.nit), converged=bool(res.success)))
        if not math.isfinite(res.fun):
            raise ValueError(f"non-finite contrast during optimization: {trace[-1]}")
        if res.success and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise RuntimeError(f"Whittle optimizer did not converge after {maxiter} iterations: {trace}")
    beta = np.clip(np.asarray(best.x, dtype=np.float64), family.lower, family.upper)
    contrast = U(beta)
    tol = 1e-6 * width
    boundary = bool(np.any(beta - family.lower <= tol) or np.any(family.upper - beta <= tol))
    adv = condition_advisories(family, beta, starts, boundary) if advisories else ()
    return WhittleFit(beta, contrast / TWO_PI, contrast, total_iter, True, boundary,
                      tuple(trace), adv, family.name)


def condition_advisories(family: ParametricFamily, beta, sample: np.ndarray | None = None,
                         boundary_hit: bool = False) -> tuple[Advisory, ...]:
    """Runtime proxies for the regularity conditions C1-C7 on a sampled
    ``beta``-grid of ``K``.

    C2 (identifiability) is checked only on the sample; C4/C5 continuity and
    differentiability hold by construction for the analytic families and are
    probed by finite differences at ``beta``.
    """
    beta = family._beta(beta)
    sample = _start_grid(family) if sample is None else sample
    lam = _grid(1024)
    out = [Advisory("C1", not boundary_hit, float(boundary_hit), "beta_hat in the interior of K")]

    shapes = np.array([family.shape(b, lam) for b in sample])
    positive = bool(np.all(shapes > 0))
    gaps = [np.max(np.abs(shapes[i] - shapes[j])) for i in range(len(sample)) for j in range(i)]
    min_gap = float(min(gaps)) if gaps else math.inf
    out.append(Advisory("C2", min_gap > 0, min_gap, "distinct shapes on the sampled grid"))

    norms = [sobolev_norm(family.inv_coeffs(b)) for b in sample]
    sup = float(max(norms))
    out.append(Advisory("C3", positive and math.isfinite(sup), sup, "sup ||g^-1||_Hs over the grid"))

    h = 1e-6 * (family.upper - family.lower)
    jump = float(np.max(np.abs(family.inv_shape(np.clip(beta + h, family.lower, family.upper), lam)
                               - family.inv_shape(beta, lam))))
    out.append(Advisory("C4", jump < 1e-3, jump, "continuity of beta -> g^-1 at beta_hat"))

    resid = abs(family.log_integral(beta))
    out.append(Advisory("C5", resid < 1e-6, resid, "normalization ∫ log g_beta = 0 at beta_hat"))

    try:
        d2 = family.d2inv_coeffs(beta)
        d2norm = float(max(sobolev_norm(g) for row in d2 for g in row))
        out.append(Advisory("C6", math.isfinite(d2norm), d2norm, "||d^2 g^-1||_Hs at beta_hat"))
    except RuntimeError as exc:
        out.append(Advisory("C6", False, math.inf, str(exc)))

    dg = np.diff(family.shape(beta, _grid(4096)))
    slope = float(np.max(np.abs(dg)) * 4096 / TWO_PI)
    out.append(Advisory("C7", math.isfinite(slope), slope, "max |d g_beta / d lam|"))
    return tuple(out)


# ---------------------------------------------------------------------------
# factorization and asymptotic covariance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    sigma2: float
    shape: Callable
    log_residual: float


def spectral_factorization(f: Callable | SpectralDensity, grid: int = 8192) -> Factorization:
    """``f = sigma^2 g`` with ``sigma^2 = exp(mean log f)`` and ``∫ log g = 0``.

    The residual is ``∫ log g`` on a grid twice as fine as the one that fixed
    ``sigma^2``.
    """
    if grid < 4096:
        raise ValueError("spectral factorization needs at least 4096 grid points")
    vals = np.asarray(f(_grid(grid)), dtype=np.float64)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("spectral density touches 0: log f is not integrable")
    sigma2 = float(np.exp(np.mean(np.log(vals))))
    fine = np.asarray(f(_grid(2 * grid)), dtype=np.float64)
    if np.any(fine <= 0):
        raise ValueError("spectral density touches 0: log f is not integrable")
    resid = float(np.mean(np.log(fine / sigma2)) * TWO_PI)
    return Factorization(sigma2, lambda lam: np.asarray(f(lam)) / sigma2, resid)


def compute_W_star(family: ParametricFamily, beta, grid: int = 4096, path: str = "inverse") -> np.ndarray:
    """``W*_ij = ∫ g^2 (d g^-1/d beta_i)(d g^-1/d beta_j)``.

    ``path="inverse"`` uses the Fourier representation of ``d g^-1``;
    ``path="log"`` uses the identity ``W*_ij = ∫ (d log g/d beta_i)(d log g/d beta_j)``.
    """
    lam = _grid(grid)
    if path == "log":
        D = family.dlog(beta, lam)
        return D @ D.T * TWO_PI / grid
    if path == "inverse":
        g = family.shape(beta, lam)
        D = np.array([np.real(d(lam)) for d in family.dinv_coeffs(beta)]) * g
        return D @ D.T * TWO_PI / grid
    raise ValueError(f"unknown path {path!r}")


def _f4_double(f4: Callable, u: np.ndarray, v: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``∫∫ f4(lam, mu, -mu) u_i(lam) v_j(mu)`` for rows of ``u``, ``v``."""
    F = np.real(f4(lam[:, None], lam[None, :], -lam[None, :]))
    w = TWO_PI / lam.size
    return u @ F @ v.T * w * w


@dataclass(frozen=True)
class QStar:
    matrix: np.ndarray
    gaussian_part: np.ndarray
    f4_part: np.ndarray


def compute_Q_star(family: ParametricFamily, beta, sigma2: float, f4: Callable | None = None,
                   grid: int = 4096, grid2: int = 512, parts: bool = False):
    """``Q*_ij = 2pi (2 sigma^4 W*_ij + ∫∫ f4(lam, mu, -mu) dg^-1_i(lam) dg^-1_j(mu))``."""
    W = compute_W_star(family, beta, grid)
    gauss = TWO_PI * 2.0 * sigma2 ** 2 * W
    if f4 is None:
        extra = np.zeros_like(W)
    else:
        lam = _grid(grid2)
        D = family.dinv_shape(beta, lam)
        extra = TWO_PI * _f4_double(f4, D, D, lam)
        extra = 0.5 * (extra + extra.T)
    Q = gauss + extra
    return QStar(Q, gauss, extra) if parts else Q


@dataclass(frozen=True)
class AsymptoticCov:
    cov_beta: np.ndarray
    var_sigma2: float
    cross: np.ndarray
    W: np.ndarray
    Q: np.ndarray


def asymptotic_cov(family: ParametricFamily, beta, sigma2: float, f4: Callable | None = None,
                   grid: int = 4096, grid2: int = 512) -> AsymptoticCov:
    """Limiting covariances of ``sqrt(n)(beta_hat - beta*)`` and
    ``sqrt(n)(sigma2_hat - sigma*^2)``.

    ``cov_beta = sigma^-4 W^-1 Q W^-1``. For the variance estimator,
    ``sigma2_hat = J_n(g^-1)/2pi`` gives ``Gamma(g^-1, g^-1)/(2pi)^2``, i.e.
    ``2 sigma^4 + (1/2pi) ∫∫ f4 g^-1 g^-1``, and the cross covariance is
    ``-(sigma^2 W)^-1 ∫∫ f4 g^-1 dg^-1``.
    """
    W = compute_W_star(family, beta, grid)
    if not np.all(np.isfinite(W)) or np.linalg.matrix_rank(W, tol=1e-10 * max(1.0, np.abs(W).max())) < family.p:
        raise np.linalg.LinAlgError("nonidentifiable at beta*: W* is singular")
    Q = compute_Q_star(family, beta, sigma2, f4, grid, grid2)
    Winv = np.linalg.inv(W)
    cov = Winv @ Q @ Winv / sigma2 ** 2
    cov = 0.5 * (cov + cov.T)
    var_s = 2.0 * sigma2 ** 2
    cross = np.zeros(family.p)
    if f4 is not None:
        lam = _grid(grid2)
        ginv = family.inv_shape(beta, lam)[None, :]
        D = family.dinv_shape(beta, lam)
        var_s += float(_f4_double(f4, ginv, ginv, lam)[0, 0]) / TWO_PI
        cross = -np.linalg.solve(sigma2 * W, _f4_double(f4, ginv, D, lam)[0])
    return AsymptoticCov(cov, var_s, cross, W, Q)
