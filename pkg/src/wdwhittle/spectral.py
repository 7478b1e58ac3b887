"""Periodogram, sample autocovariances, integrated periodogram and the
limiting covariance formulas of the integrated periodogram.

Conventions
-----------
* Series are indexed ``X_1, ..., X_n`` and assumed zero-mean; nothing is
  subtracted unless ``center=True`` is requested.
* A test function is ``g(lam) = sum_l g_l exp(i l lam)``.
* Autocovariance estimates are biased (divisor ``n``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
TAIL_TOL = 1e-10


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSeries:
    """Finite real sample ``X_1..X_n``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("empty input")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def centered(self) -> "TimeSeries":
        return TimeSeries(self.values - self.values.mean())


def as_series(ts, center: bool = False) -> TimeSeries:
    if not isinstance(ts, TimeSeries):
        ts = TimeSeries(np.asarray(ts, dtype=np.float64))
    return ts.centered() if center else ts


@dataclass(frozen=True)
class FourierFunction:
    """2pi-periodic function stored by its Fourier coefficients.

    ``coeffs[l + L]`` holds ``g_l`` for ``l = -L..L``. Coefficients need not be
    Hermitian at construction time (complex exponentials are legitimate dual
    test functions), but operations that need a real-valued ``g`` check it.
    """

    coeffs: np.ndarray
    sobolev_index: float = 1.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size % 2 == 0:
            raise ValueError("coefficient array must have odd length 2L+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def L(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex], sobolev_index: float = 1.0):
        L = max((abs(int(k)) for k in coeffs), default=0)
        c = np.zeros(2 * L + 1, dtype=np.complex128)
        for k, v in coeffs.items():
            c[int(k) + L] += v
        return cls(c, sobolev_index)

    @classmethod
    def constant(cls, value: float = 1.0, sobolev_index: float = 1.0):
        return cls(np.array([value], dtype=np.complex128), sobolev_index)

    @classmethod
    def cosine(cls, lag: int, amplitude: float = 1.0, sobolev_index: float = 1.0):
        """``amplitude * cos(lag * lam)``."""
        lag = abs(int(lag))
        if lag == 0:
            return cls.constant(amplitude, sobolev_index)
        return cls.from_dict({lag: amplitude / 2, -lag: amplitude / 2}, sobolev_index)

    @classmethod
    def from_samples(cls, values: np.ndarray, L: int, sobolev_index: float = 1.0):
        """Coefficients ``|l| <= L`` from samples on the grid ``2 pi j / N``."""
        values = np.asarray(values)
        N = values.size
        if 2 * L + 1 > N:
            raise ValueError("grid too coarse for the requested number of coefficients")
        spec = np.fft.fft(values) / N  # aliased g_l sits in bin l mod N
        idx = np.arange(-L, L + 1) % N
        return cls(spec[idx], sobolev_index)

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], L: int,
                      grid: int | None = None, sobolev_index: float = 1.0):
        N = grid or max(4096, 1 << int(math.ceil(math.log2(8 * L + 8))))
        lam = TWO_PI * np.arange(N) / N
        return cls.from_samples(func(lam), L, sobolev_index)

    def coef(self, lag) -> np.ndarray:
        lag = np.asarray(lag)
        out = np.zeros(lag.shape, dtype=np.complex128)
        inside = np.abs(lag) <= self.L
        out[inside] = self.coeffs[lag[inside] + self.L]
        return out

    def is_real(self, rtol: float = 1e-12) -> bool:
        c = self.coeffs
        scale = max(np.max(np.abs(c)), 1e-300)
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= rtol * scale)

    def require_real(self):
        if not self.is_real():
            raise ValueError("g not real-valued")

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        ell = np.arange(-self.L, self.L + 1)
        vals = np.exp(1j * np.multiply.outer(lam, ell)) @ self.coeffs
        return vals.real if self.is_real() else vals

    def with_index(self, s: float) -> "FourierFunction":
        return FourierFunction(self.coeffs, s)

    def __add__(self, other: "FourierFunction") -> "FourierFunction":
        L = max(self.L, other.L)
        c = np.zeros(2 * L + 1, dtype=np.complex128)
        c[L - self.L:L + self.L + 1] += self.coeffs
        c[L - other.L:L + other.L + 1] += other.coeffs
        return FourierFunction(c, self.sobolev_index)

    def __mul__(self, scalar: float) -> "FourierFunction":
        return FourierFunction(self.coeffs * scalar, self.sobolev_index)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PeriodogramSummary:
    """Biased sample autocovariances ``rhat[k]`` for ``k = 0..n-1``."""

    rhat: np.ndarray
    n: int

    def at(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k))
        out = np.zeros(k.shape)
        inside = k < self.n
        out[inside] = self.rhat[k[inside]]
        return out


@dataclass(frozen=True)
class SpectralDensity:
    """Second- and fourth-order description of a stationary model.

    ``autocov[k]`` is ``R(k)`` for ``k = 0..L``; beyond ``L`` the model
    contributes at most ``tail_sq`` to ``sum_{|k|>L} R(k)^2``. The optional
    accessors return the fourth cumulant ``kappa4(h, k, l)`` and the
    bispectral density ``f4(lam, mu, nu)``; both must broadcast over arrays.
    """

    autocov: np.ndarray
    density_fn: Callable[[np.ndarray], np.ndarray] | None = None
    kappa4: Callable | None = None
    f4: Callable | None = None
    kappa4_sum: float | None = None
    tail_sq: float = 0.0
    label: str = ""

    def __post_init__(self):
        r = np.array(self.autocov, dtype=np.float64).ravel()
        r.setflags(write=False)
        object.__setattr__(self, "autocov", r)

    @property
    def L(self) -> int:
        return self.autocov.size - 1

    def R(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k))
        out = np.zeros(k.shape)
        inside = k <= self.L
        out[inside] = self.autocov[k[inside]]
        return out

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        if self.density_fn is not None:
            return self.density_fn(lam)
        k = np.arange(1, self.L + 1)
        return (self.autocov[0] + 2.0 * np.cos(np.multiply.outer(lam, k)) @ self.autocov[1:]) / TWO_PI

    @property
    def gamma(self) -> float:
        """``sum_l R(l)^2`` over all integers (stored lags plus tail)."""
        r = self.autocov
        return float(r[0] ** 2 + 2.0 * np.sum(r[1:] ** 2) + self.tail_sq)

    @classmethod
    def white_noise(cls, variance: float = 1.0, c4: float = 0.0) -> "SpectralDensity":
        def kappa4(h, k, l):
            h, k, l = np.broadcast_arrays(np.asarray(h), np.asarray(k), np.asarray(l))
            return np.where((h == 0) & (k == 0) & (l == 0), c4, 0.0)

        def f4(lam, mu, nu):
            return np.zeros(np.broadcast(np.asarray(lam), np.asarray(mu), np.asarray(nu)).shape) + c4 / TWO_PI ** 3

        return cls(
            np.array([variance]),
            density_fn=lambda lam: np.full(np.shape(lam), variance / TWO_PI),
            kappa4=kappa4,
            f4=f4,
            kappa4_sum=abs(c4),
            label="white_noise",
        )


# ---------------------------------------------------------------------------
# sample quantities
# ---------------------------------------------------------------------------


def sample_autocovariance(ts, k: int, center: bool = False) -> float:
    """Biased estimate ``(1/n) sum_j X_j X_{j+|k|}``; zero when ``|k| >= n``."""
    x = as_series(ts, center).values
    n = x.size
    k = abs(int(k))
    if k >= n:
        return 0.0
    return float(np.dot(x[: n - k], x[k:]) / n)


def sample_autocovariances(ts, maxlag: int | None = None, center: bool = False) -> np.ndarray:
    """``R̂_n(0..maxlag)`` via a zero-padded FFT (``maxlag`` defaults to ``n-1``)."""
    x = as_series(ts, center).values
    n = x.size
    maxlag = n - 1 if maxlag is None else maxlag
    nfft = 1 << int(math.ceil(math.log2(2 * n)))
    fx = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(fx * np.conj(fx), nfft)[:n] / n
    out = np.zeros(maxlag + 1)
    m = min(maxlag, n - 1) + 1
    out[:m] = acov[:m]
    return out


def periodogram_summary(ts, center: bool = False) -> PeriodogramSummary:
    ts = as_series(ts, center)
    return PeriodogramSummary(sample_autocovariances(ts), ts.n)


def periodogram(ts, lam, center: bool = False):
    """``I_n(lam) = |sum_k X_k exp(-i k lam)|^2 / (2 pi n)``."""
    x = as_series(ts, center).values
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    k = np.arange(1, x.size + 1)
    out = np.empty(lam_arr.shape)
    flat = lam_arr.ravel()
    res = out.ravel()
    chunk = max(1, 2_000_000 // x.size)
    for start in range(0, flat.size, chunk):
        sl = slice(start, start + chunk)
        dft = np.exp(-1j * np.multiply.outer(flat[sl], k)) @ x
        res[sl] = np.abs(dft) ** 2 / (TWO_PI * x.size)
    out = res.reshape(lam_arr.shape)
    return float(out[0]) if np.ndim(lam) == 0 else out


def fourier_frequencies(n: int) -> np.ndarray:
    """``2 pi j / n`` for ``j = -floor(n/2) .. ceil(n/2) - 1``."""
    j = np.arange(-(n // 2), -(n // 2) + n)
    return TWO_PI * j / n


def periodogram_grid(ts, center: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Periodogram at the Fourier frequencies, computed with one FFT."""
    x = as_series(ts, center).values
    n = x.size
    lam = fourier_frequencies(n)
    # sum_{k=1}^n x_k e^{-ik lam_j}: shift by one sample relative to numpy's k=0 origin
    # the k=1 origin only changes the phase of the DFT
    j = np.round(lam * n / TWO_PI).astype(int) % n
    return lam, np.abs(np.fft.fft(x)[j]) ** 2 / (TWO_PI * n)


def _midpoint_grid(N: int) -> np.ndarray:
    return -np.pi + TWO_PI * (np.arange(N) + 0.5) / N


def _periodogram_on_midpoints(x: np.ndarray, N: int) -> np.ndarray:
    """``I_n`` at the midpoints ``-pi + (j + 1/2) 2pi/N`` using one FFT."""
    n = x.size
    h = TWO_PI / N
    k = np.arange(1, n + 1)
    y = x * np.exp(1j * k * (np.pi - h / 2))
    # fold onto N bins: e^{-ik j h} only depends on k mod N
    folded = np.zeros(N, dtype=np.complex128)
    np.add.at(folded, k % N, y)
    dft = np.fft.fft(folded)
    return np.abs(dft) ** 2 / (TWO_PI * n)


def integrated_periodogram(ts, g: FourierFunction, method: str = "coefficient",
                           grid_size: int = 8192, center: bool = False,
                           rhat: np.ndarray | None = None) -> float:
    """``J_n(g) = ∫ g(lam) I_n(lam) dlam``.

    ``method="coefficient"`` evaluates ``sum_{|l|<n} g_l R̂_n(l)`` exactly;
    ``method="quadrature"`` applies the midpoint rule on ``grid_size`` points.
    A precomputed ``rhat`` (lags ``0..n-1``) may be passed to skip the FFT.
    """
    g.require_real()
    ts = as_series(ts, center)
    n = ts.n
    if method == "coefficient":
        if rhat is None:
            rhat = sample_autocovariances(ts, min(g.L, n - 1))
        m = min(g.L, n - 1)
        c = g.coeffs
        L = g.L
        total = c[L].real * rhat[0]
        if m >= 1:
            pos = c[L + 1:L + m + 1]
            neg = c[L - m:L][::-1]
            total += np.dot((pos + neg).real, rhat[1:m + 1])
        return float(total)
    if method == "quadrature":
        lam = _midpoint_grid(grid_size)
        vals = g(lam) * _periodogram_on_midpoints(ts.values, grid_size)
        return float(np.sum(vals) * TWO_PI / grid_size)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Sobolev scale
# ---------------------------------------------------------------------------


def _check_index(s: float):
    if not s > 0.5:
        raise ValueError("index below Sobolev embedding threshold")


def sobolev_norm(g: FourierFunction, s: float | None = None) -> float:
    """``sqrt(sum_l (1+|l|)^{2s} |g_l|^2)``."""
    s = g.sobolev_index if s is None else s
    _check_index(s)
    ell = np.arange(-g.L, g.L + 1)
    return float(np.sqrt(np.sum((1.0 + np.abs(ell)) ** (2 * s) * np.abs(g.coeffs) ** 2)))


def _power_tail(p: float, M: int) -> tuple[float, float]:
    """``sum_{m >= M} m^{-p}`` by Euler-Maclaurin, with an error bound."""
    Mf = float(M)
    integral = Mf ** (1 - p) / (p - 1)
    f0 = Mf ** -p
    d1 = -p * Mf ** (-p - 1)
    d3 = -p * (p + 1) * (p + 2) * Mf ** (-p - 3)
    value = integral + f0 / 2 - d1 / 12 + d3 / 720
    d5 = p * (p + 1) * (p + 2) * (p + 3) * (p + 4) * Mf ** (-p - 5)
    return value, abs(d5) / 30240 * 2


def c_s_constant(s: float) -> float:
    """``c_s = sum_{l in Z} (1+|l|)^{-2s}`` (sup-norm embedding constant)."""
    if not s > 0.5:
        raise ValueError("divergent sum: c_s requires s > 1/2")
    p = 2.0 * s
    M = 64
    head = math.fsum(m ** -p for m in range(2, M))
    tail, err = _power_tail(p, M)
    assert err < TAIL_TOL
    return 1.0 + 2.0 * (head + tail)


# ---------------------------------------------------------------------------
# population quantities
# ---------------------------------------------------------------------------


def spectral_integral(g: FourierFunction, model: SpectralDensity,
                      tail: int | None = None) -> tuple[float, float]:
    """``J(g) = sum_l g_l R(l)`` truncated at ``|l| <= tail``.

    Returns ``(value, abserr)`` where ``abserr`` bounds the omitted terms by
    Cauchy-Schwarz in the ``(1+|l|)^{±s}`` weights.
    """
    g.require_real()
    tail = max(g.L, model.L) if tail is None else int(tail)
    ell = np.arange(-tail, tail + 1)
    value = float(np.real(np.sum(g.coef(ell) * model.R(ell))))
    s = g.sobolev_index
    outer_g = np.arange(tail + 1, g.L + 1)
    g_tail = np.sum((1.0 + outer_g) ** (2 * s) * (np.abs(g.coef(outer_g)) ** 2 + np.abs(g.coef(-outer_g)) ** 2))
    outer_r = np.arange(tail + 1, model.L + 1)
    r_tail = 2.0 * np.sum(model.R(outer_r) ** 2) + model.tail_sq
    abserr = float(np.sqrt(g_tail * r_tail) * (2.0 + tail) ** -s)
    return value, abserr


def dual_norm_sq_from_rhat(rhat: np.ndarray, n: int, model: SpectralDensity, s: float,
                           tail: int | None = None) -> float:
    """Squared dual-norm distance given sample autocovariances ``rhat[0..]``."""
    _check_index(s)
    tail = max(n - 1, model.L) if tail is None else int(tail)
    ell = np.arange(tail + 1)
    emp = np.zeros(tail + 1)
    m = min(tail, n - 1, rhat.size - 1) + 1
    emp[:m] = rhat[:m]
    d = emp - model.R(ell)
    w = (1.0 + ell) ** (-2.0 * s)
    terms = w * d * d
    total = terms[0] + 2.0 * np.sum(terms[1:])
    # lags beyond `tail` contribute the model tail only (R̂ vanishes there if tail >= n-1)
    outer = np.arange(tail + 1, model.L + 1)
    total += 2.0 * np.sum((1.0 + outer) ** (-2.0 * s) * model.R(outer) ** 2)
    total += (1.0 + max(tail, model.L)) ** (-2.0 * s) * model.tail_sq
    return float(total)


def dual_norm_discrepancy(ts, model: SpectralDensity, s: float, tail: int | None = None,
                          squared: bool = False, center: bool = False) -> float:
    """``||J_n - J||`` in the dual Sobolev norm of index ``s``.

    Evaluated exactly through ``(J_n - J)(e^{i l .}) = R̂_n(l) 1{|l|<n} - R(l)``.
    """
    ts = as_series(ts, center)
    val = dual_norm_sq_from_rhat(sample_autocovariances(ts), ts.n, model, s, tail)
    return val if squared else math.sqrt(val)


def sigma_matrix(model: SpectralDensity, lags: Sequence[int], kappa4: Callable | None = None,
                 tail: int | None = None) -> np.ndarray:
    """Asymptotic covariance matrix of ``sqrt(n) R̂_n(lags)``.

    ``sigma_{k,l} = sum_h R(h)R(h+l-k) + R(h+l)R(h-k) + kappa4(h, k, h+l)``.
    """
    kappa4 = model.kappa4 if kappa4 is None else kappa4
    if kappa4 is None:
        raise ValueError("fourth-order cumulants unavailable for this model")
    if not np.isfinite(model.tail_sq):
        raise ValueError("autocovariance tail not square-summable; sigma_{k,l} diverges")
    if model.tail_sq > TAIL_TOL:
        raise ValueError(
            f"autocovariance tail mass {model.tail_sq:.3g} exceeds {TAIL_TOL:g}; extend the model lags")
    lags = [int(v) for v in lags]
    span = max(abs(v) for v in lags)
    H = model.L + span if tail is None else int(tail)
    h = np.arange(-H, H + 1)
    m = len(lags)
    out = np.empty((m, m))
    for i, k in enumerate(lags):
        for j, l in enumerate(lags):
            terms = model.R(h) * model.R(h + l - k) + model.R(h + l) * model.R(h - k)
            terms = terms + kappa4(h, np.full_like(h, k), h + l)
            out[i, j] = math.fsum(terms)
    return 0.5 * (out + out.T)


def _quad_covariance(g1: FourierFunction, g2: FourierFunction, model: SpectralDensity,
                     f4: Callable | None, N: int, N2: int) -> float:
    lam = _midpoint_grid(N)
    f = model(lam)
    first = 4.0 * np.pi * np.sum(g1(lam) * g2(lam) * f * f) * TWO_PI / N
    if f4 is None:
        return float(first)
    mu = _midpoint_grid(N2)
    a = g1(mu)
    b = g2(mu)
    F = f4(mu[:, None], -mu[None, :], mu[None, :])
    second = TWO_PI * (a @ F @ b) * (TWO_PI / N2) ** 2
    return float(first + second)


def limit_covariance(g1: FourierFunction, g2: FourierFunction, model: SpectralDensity,
                     f4: Callable | None = None, grid: int = 4096, grid2: int = 256,
                     rtol: float = 1e-8) -> float:
    """``Gamma(g1, g2) = 4pi ∫ g1 g2 f^2 + 2pi ∫∫ g1(lam) g2(mu) f4(lam, -mu, mu)``.

    Midpoint rule on uniform grids; the value is recomputed on grids twice as
    fine and a ``RuntimeError`` is raised when the two disagree beyond
    ``rtol`` (relative to ``1 + |value|``).
    """
    g1.require_real()
    g2.require_real()
    f4 = model.f4 if f4 is None else f4
    coarse = _quad_covariance(g1, g2, model, f4, grid, grid2)
    fine = _quad_covariance(g1, g2, model, f4, 2 * grid, 2 * grid2)
    if abs(fine - coarse) > rtol * (1.0 + abs(fine)):
        raise RuntimeError(
            f"quadrature did not converge: {coarse!r} vs {fine!r} on grids {grid}/{2 * grid}")
    return fine


def sigma_ell(model: SpectralDensity, lag: int, f4: Callable | None = None, **kw) -> float:
    """``sigma_l^2 = Gamma(cos(l .), cos(l .))``, the limiting variance of ``sqrt(n) R̂_n(l)``."""
    g = FourierFunction.cosine(lag)
    return limit_covariance(g, g, model, f4, **kw)
