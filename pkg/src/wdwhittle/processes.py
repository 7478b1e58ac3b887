"""Model families, their simulators and their exact second/fourth-order
descriptions.

Families
--------
``CausalLinear``    X_k = sum_{j>=0} a_j xi_{k-j}
``TwoSidedLinear``  X_k = sum_j a_j xi_{k-j}, j over a finite window of Z
``Garch``           X_k = rho_k xi_k, rho_k^2 = a0 + sum a_j X_{k-j}^2 + sum c_j rho_{k-j}^2
``ArchInf``         X_k = rho_k xi_k, rho_k^2 = b0 + sum_{j>=1} b_j X_{k-j}^2
``Bilinear``        X_k = xi_k (a0 + sum a_j X_{k-j}) + sum c_j X_{k-j}
``Volterra``        X_k = sum over ordered index tuples of a_{j1..jp} xi_{k-j1}...xi_{k-jp}
``LinearDepInnov``  two-sided filter applied to the output of another model

Infinite coefficient sequences are stored truncated at the first lag whose
remaining absolute mass is below ``TRUNC_TOL``; the simulated and the
described process are both that truncated model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np
from scipy import integrate, special

from . import kernels, rng
from .spectral import TWO_PI, SpectralDensity, TimeSeries

TRUNC_TOL = 1e-8
MAX_LAGS = 20000


# ---------------------------------------------------------------------------
# innovations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InnovationSpec:
    """I.i.d. innovation law.

    ``distribution`` is one of ``gaussian``, ``uniform``, ``student`` (``df``
    degrees of freedom, rescaled to the requested variance) or
    ``centered_square``, the law of ``(xi^2 - E xi^2) / sqrt(Var xi^2)`` for
    ``xi`` distributed as ``base``. ``moment_order`` is the ``m`` used when a
    simulator validates stationarity.
    """

    distribution: str = "gaussian"
    variance: float = 1.0
    df: float | None = None
    moment_order: float = 2.0
    base: "InnovationSpec | None" = None

    def __post_init__(self):
        if self.distribution not in ("gaussian", "uniform", "student", "centered_square"):
            raise ValueError(f"unknown innovation distribution {self.distribution!r}")
        if not self.variance > 0:
            raise ValueError("innovation variance must be positive")
        if self.distribution == "student" and (self.df is None or self.df <= 4):
            raise ValueError("student innovations need df > 4 (finite fourth moment)")
        if self.distribution == "centered_square":
            if self.base is None:
                raise ValueError("centered_square innovations need a base law")
            object.__setattr__(self, "variance", 1.0)

    # scale of the underlying standard law
    @property
    def _scale(self) -> float:
        sd = math.sqrt(self.variance)
        if self.distribution == "uniform":
            return math.sqrt(3.0) * sd
        if self.distribution == "student":
            return sd * math.sqrt((self.df - 2.0) / self.df)
        return sd

    @property
    def lambda1(self) -> float:
        """``E xi^2``."""
        return self.variance

    @property
    def fourth_moment(self) -> float:
        v2 = self.variance ** 2
        if self.distribution == "gaussian":
            return 3.0 * v2
        if self.distribution == "uniform":
            return 1.8 * v2
        if self.distribution == "student":
            return 3.0 * v2 * (self.df - 2.0) / (self.df - 4.0)
        return self.base.centered_square_abs_moment(4) / self.base.gamma2 ** 2

    @property
    def gamma2(self) -> float:
        """``Var(xi^2)``."""
        return self.fourth_moment - self.variance ** 2

    @property
    def c4(self) -> float:
        """Fourth cumulant ``E xi^4 - 3 (E xi^2)^2``."""
        return self.fourth_moment - 3.0 * self.variance ** 2

    def abs_moment(self, p: float) -> float:
        """``E |xi|^p`` (``inf`` when it does not exist)."""
        k = self._scale
        if self.distribution == "gaussian":
            return k ** p * 2 ** (p / 2) * special.gamma((p + 1) / 2) / math.sqrt(math.pi)
        if self.distribution == "uniform":
            return k ** p / (p + 1)
        if self.distribution == "student":
            nu = self.df
            if p >= nu:
                return math.inf
            return k ** p * nu ** (p / 2) * math.exp(
                special.gammaln((p + 1) / 2) + special.gammaln((nu - p) / 2)
                - special.gammaln(nu / 2)) / math.sqrt(math.pi)
        return self.base.centered_square_abs_moment(p) / self.base.gamma2 ** (p / 2)

    def norm(self, p: float) -> float:
        """``||xi||_p``."""
        mom = self.abs_moment(p)
        return math.inf if not math.isfinite(mom) else mom ** (1.0 / p)

    def _pdf(self):
        k = self._scale
        if self.distribution == "gaussian":
            return lambda x: np.exp(-0.5 * (x / k) ** 2) / (k * math.sqrt(TWO_PI)), math.inf
        if self.distribution == "uniform":
            return lambda x: 0.5 / k, k
        if self.distribution == "student":
            nu = self.df
            const = math.exp(special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2)) / math.sqrt(nu * math.pi) / k
            return lambda x: const * (1 + (x / k) ** 2 / nu) ** (-(nu + 1) / 2), math.inf
        raise ValueError("density of a centered_square law is not tabulated")

    def centered_square_abs_moment(self, q: float) -> float:
        """``E |xi^2 - E xi^2|^q`` by quadrature against the density."""
        if self.distribution == "student" and 2 * q >= self.df:
            return math.inf
        pdf, upper = self._pdf()
        lam1 = self.lambda1
        root = math.sqrt(lam1)
        f = lambda x: abs(x * x - lam1) ** q * pdf(x)
        pieces = [(0.0, min(root, upper))]
        if upper > root:
            pieces.append((root, upper))
        total = 0.0
        for lo, hi in pieces:
            val, _ = integrate.quad(f, lo, hi, limit=200, epsabs=0, epsrel=1e-12)
            total += val
        return 2.0 * total

    def centered_square_norm(self, q: float) -> float:
        mom = self.centered_square_abs_moment(q)
        return math.inf if not math.isfinite(mom) else mom ** (1.0 / q)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.distribution == "gaussian":
            return self._scale * gen.standard_normal(size)
        if self.distribution == "uniform":
            k = self._scale
            return gen.uniform(-k, k, size)
        if self.distribution == "student":
            return self._scale * gen.standard_t(self.df, size)
        xi = self.base.sample(gen, size)
        return (xi * xi - self.base.lambda1) / math.sqrt(self.base.gamma2)

    def draw(self, seed: int, stream: int, lo: int, hi: int) -> np.ndarray:
        """Innovations at time indices ``lo..hi`` (inclusive)."""
        return rng.draw(self.sample, seed, stream, lo, hi)


def centered_square(base: InnovationSpec) -> InnovationSpec:
    return InnovationSpec("centered_square", base=base)


# ---------------------------------------------------------------------------
# model specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decay:
    """Decay class of a coefficient sequence: ``finite``, ``geometric`` with
    ratio ``rate`` in (0, 1), or ``riemannian`` with ``O(j^-rate)``."""

    kind: str = "finite"
    rate: float | None = None

    def __post_init__(self):
        if self.kind not in ("finite", "geometric", "riemannian"):
            raise ValueError(f"unknown decay class {self.kind!r}")
        if self.kind == "geometric" and not (self.rate is not None and 0 < self.rate < 1):
            raise ValueError("geometric decay needs a ratio in (0, 1)")
        if self.kind == "riemannian" and not (self.rate is not None and self.rate > 0):
            raise ValueError("riemannian decay needs a positive exponent")


def _arr(x) -> np.ndarray:
    a = np.array(x, dtype=np.float64).ravel()
    a.setflags(write=False)
    return a


def _check_decay(coeffs: np.ndarray, decay: Decay, what: str):
    """Stored coefficients must be compatible with the declared decay tag."""
    if decay.kind == "geometric" and coeffs.size > 1:
        j = np.arange(coeffs.size)
        nz = np.abs(coeffs) > 0
        if nz.any():
            ratio = np.abs(coeffs[nz]) / decay.rate ** j[nz]
            if ratio.max() > 1e3 * max(ratio[0], 1.0):
                raise ValueError(f"{what} coefficients decay slower than geometric({decay.rate})")


def trim_tail(coeffs: np.ndarray, tol: float = TRUNC_TOL) -> np.ndarray:
    """Drop the longest trailing block whose absolute mass is below ``tol``."""
    c = np.asarray(coeffs, dtype=np.float64)
    tail = np.cumsum(np.abs(c[::-1]))[::-1]
    keep = np.nonzero(tail >= tol)[0]
    return c[: keep[-1] + 1] if keep.size else c[:1]


@dataclass(frozen=True)
class CausalLinear:
    coeffs: np.ndarray
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    decay: Decay = field(default_factory=Decay)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _arr(self.coeffs))
        _check_decay(self.coeffs, self.decay, "linear")

    lo = 0

    @classmethod
    def arma(cls, ar: Sequence[float] = (), ma: Sequence[float] = (),
             innovation: InnovationSpec | None = None, tol: float = TRUNC_TOL) -> "CausalLinear":
        """Moving-average weights of ``(1 - sum ar_j B^j) X = (1 + sum ma_j B^j) xi``."""
        # trailing zero lags carry no roots
        ar = np.trim_zeros(np.asarray(ar, dtype=np.float64), "b")
        ma = np.trim_zeros(np.asarray(ma, dtype=np.float64), "b")
        if ar.size and np.any(np.abs(np.roots(np.r_[-ar[::-1], 1.0])) <= 1.0):
            raise ValueError("autoregressive polynomial has a root on or inside the unit circle")
        psi = [1.0]
        theta = np.r_[1.0, ma]
        for j in range(1, MAX_LAGS):
            v = theta[j] if j < theta.size else 0.0
            for i in range(1, min(j, ar.size) + 1):
                v += ar[i - 1] * psi[j - i]
            psi.append(v)
            if ar.size == 0 and j >= ma.size:
                break
            if j > max(ar.size, ma.size) + 5 and sum(abs(p) for p in psi[-5:]) < tol * 1e-3:
                break
        psi = trim_tail(np.array(psi), tol)
        decay = Decay()
        if ar.size:
            radius = float(np.max(1.0 / np.abs(np.roots(np.r_[-ar[::-1], 1.0]))))
            decay = Decay("geometric", min(max(radius, 1e-6) * (1 + 1e-9), 1 - 1e-12))
        return cls(psi, innovation or InnovationSpec(), decay)


@dataclass(frozen=True)
class TwoSidedLinear:
    """``coeffs[i]`` multiplies ``xi_{k - (lo + i)}``."""

    coeffs: np.ndarray
    lo: int = 0
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    decay: Decay = field(default_factory=Decay)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _arr(self.coeffs))


@dataclass(frozen=True)
class Garch:
    a0: float
    a: tuple = ()
    c: tuple = ()
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    burn_in: int | None = None

    def __post_init__(self):
        if not self.a0 > 0:
            raise ValueError("GARCH requires a0 > 0")
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if any(v < 0 for v in self.a + self.c):
            raise ValueError("GARCH coefficients a_j, c_j must be nonnegative")


@dataclass(frozen=True)
class ArchInf:
    b0: float
    b: np.ndarray
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    decay: Decay = field(default_factory=Decay)
    burn_in: int | None = None

    def __post_init__(self):
        if not self.b0 > 0:
            raise ValueError("ARCH(inf) requires b0 > 0")
        object.__setattr__(self, "b", _arr(self.b))
        if np.any(self.b < 0):
            raise ValueError("ARCH(inf) coefficients must be nonnegative")
        _check_decay(self.b, self.decay, "ARCH")


@dataclass(frozen=True)
class Bilinear:
    """``a[j-1]``, ``c[j-1]`` hold ``a_j``, ``c_j`` for ``j >= 1``; ``c_0 = 0``."""

    a0: float
    a: np.ndarray = ()
    c: np.ndarray = ()
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    decay: Decay = field(default_factory=Decay)
    burn_in: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", _arr(self.a))
        object.__setattr__(self, "c", _arr(self.c))


@dataclass(frozen=True)
class Volterra:
    """Finite chaos expansion; ``terms`` maps strictly increasing index tuples
    ``(j1 < ... < jp)`` with ``p <= 3`` to coefficients."""

    terms: Mapping
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    decay: Decay = field(default_factory=Decay)

    def __post_init__(self):
        clean = {}
        for key, val in dict(self.terms).items():
            key = (int(key),) if np.isscalar(key) else tuple(int(v) for v in key)
            if not 1 <= len(key) <= 3:
                raise ValueError("Volterra chaos order must be between 1 and 3")
            if any(b <= a for a, b in zip(key, key[1:])):
                raise ValueError(f"Volterra indices must be strictly increasing, got {key}")
            clean[key] = clean.get(key, 0.0) + float(val)
        object.__setattr__(self, "terms", clean)

    @property
    def order(self) -> int:
        return max(len(k) for k in self.terms)


@dataclass(frozen=True)
class LinearDepInnov:
    coeffs: np.ndarray
    inner: "Model"
    lo: int = 0
    decay: Decay = field(default_factory=Decay)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _arr(self.coeffs))

    @property
    def innovation(self) -> InnovationSpec:
        return self.inner.innovation


Model = Union[CausalLinear, TwoSidedLinear, Garch, ArchInf, Bilinear, Volterra, LinearDepInnov]


# ---------------------------------------------------------------------------
# conversions between families
# ---------------------------------------------------------------------------


def garch_to_arch_inf(model: Garch, tol: float = TRUNC_TOL) -> ArchInf:
    """``b(z) = A(z) / (1 - C(z))`` and ``b0 = a0 / (1 - sum c_j)``."""
    a = np.asarray(model.a)
    c = np.asarray(model.c)
    if c.sum() >= 1:
        raise ValueError("GARCH requires sum c_j < 1 for an ARCH(inf) representation")
    nb = max(a.size, 1)
    b = []
    for j in range(1, MAX_LAGS):
        v = a[j - 1] if j <= a.size else 0.0
        for i in range(1, min(j - 1, c.size) + 1):
            v += c[i - 1] * b[j - 1 - i]
        b.append(v)
        if j > nb + c.size and (c.size == 0 or sum(b[-c.size:]) * (1 + 1 / (1 - c.sum())) < tol * 1e-2):
            break
    b = trim_tail(np.array(b), tol) if np.any(b) else np.zeros(1)
    ratio = float(np.max(np.abs(np.roots(np.r_[1.0, -c])))) if c.size and np.any(c) else 0.0
    decay = Decay("geometric", min(max(ratio, 1e-6) * (1 + 1e-9), 1 - 1e-12)) if ratio > 0 else Decay()
    return ArchInf(model.a0 / (1.0 - c.sum()), b, model.innovation, decay, model.burn_in)


def _as_arch(model) -> ArchInf:
    return garch_to_arch_inf(model) if isinstance(model, Garch) else model


def squared_mean(model: ArchInf | Garch) -> float:
    """``E X^2 = lambda1 b0 / (1 - lambda1 sum b_j)``."""
    m = _as_arch(model)
    lam1 = m.innovation.lambda1
    denom = 1.0 - lam1 * m.b.sum()
    if denom <= 0:
        raise ValueError("lambda1 * sum b_j >= 1: no finite second moment")
    return lam1 * m.b0 / denom


def arch_squared_transform(model: ArchInf | Garch) -> Bilinear:
    """Bilinear equation of ``Y_k = X_k^2 - E X_k^2``.

    With ``eps_k = (xi_k^2 - lambda1) / gamma``: ``a_j = gamma b_j``,
    ``c_j = lambda1 b_j``, ``c_0 = 0`` and, after re-centering,
    ``a_0 = gamma b0 / (1 - lambda1 sum b_j)``.
    """
    m = _as_arch(model)
    inn = m.innovation
    gamma = math.sqrt(max(inn.gamma2, 0.0))
    if gamma == 0.0:
        raise ValueError("degenerate innovations: Var(xi^2) = 0")
    lam1 = inn.lambda1
    B = float(m.b.sum())
    a0 = gamma * m.b0 / (1.0 - lam1 * B)
    return Bilinear(a0, gamma * m.b, lam1 * m.b, centered_square(inn), m.decay, m.burn_in)


def bilinear_series_coeffs(a, c, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Power-series coefficients ``g_0..g_L`` of ``(1 - C(z))^-1`` and
    ``h_0..h_L`` of ``A(z) G(z)`` (``h_0 = 0``)."""
    a = np.asarray(a, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if np.sum(np.abs(c)) >= 1:
        raise ValueError("sum |c_j| >= 1: the series G(z) = (1 - C(z))^-1 may diverge")
    g = np.zeros(L + 1)
    g[0] = 1.0
    for j in range(1, L + 1):
        m = min(j, c.size)
        g[j] = np.dot(c[:m], g[j - 1::-1][:m])
    h = np.zeros(L + 1)
    for j in range(1, L + 1):
        m = min(j, a.size)
        h[j] = np.dot(a[:m], g[j - 1::-1][:m])
    return g, h


# ---------------------------------------------------------------------------
# stationarity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationarityReport:
    status: str  # pass | fail | indeterminate
    margin: float
    inequality: str
    lhs: float

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _strict_report(lhs: float, text: str) -> StationarityReport:
    if not math.isfinite(lhs):
        return StationarityReport("fail", -math.inf, text, lhs)
    margin = 1.0 - lhs
    return StationarityReport("pass" if margin > 0 else "fail", margin, text, lhs)


def stationarity_check(model: Model, m: float) -> StationarityReport:
    """Sufficient condition for an ``L^m`` stationary solution."""
    inn = model.innovation
    if isinstance(model, Bilinear):
        try:
            norm_m = inn.norm(m)
        except ValueError:
            return StationarityReport("indeterminate", math.nan, "||xi||_m unknown", math.nan)
        lhs = norm_m * (np.abs(model.a).sum() + np.abs(model.c).sum())
        return _strict_report(float(lhs), f"||xi_0||_{m:g} * (sum|a_j| + sum|c_j|) < 1")
    if isinstance(model, (ArchInf, Garch)):
        arch = _as_arch(model)
        if not model.a0 > 0 if isinstance(model, Garch) else not arch.b0 > 0:
            return StationarityReport("fail", -math.inf, "a0 > 0", math.nan)
        ratio = inn.centered_square_norm(m / 2) / inn.centered_square_norm(2) + 1.0 \
            if m >= 2 else math.inf
        branch = min(ratio, inn.norm(m) ** 2)
        lhs = branch * float(np.abs(arch.b).sum())
        return _strict_report(
            lhs, f"min(||xi^2-l1||_{m / 2:g}/||xi^2-l1||_2 + 1, ||xi||_{m:g}^2) * sum|b_j| < 1")
    if isinstance(model, Volterra):
        lhs = sum(abs(v) ** m * inn.norm(m) ** len(k) for k, v in model.terms.items())
        status = "pass" if math.isfinite(lhs) else "fail"
        return StationarityReport(status, math.inf if status == "pass" else -math.inf,
                                  f"sum |a|^{m:g} ||xi||_{m:g}^p < inf", lhs)
    if isinstance(model, (CausalLinear, TwoSidedLinear)):
        lhs = float(np.abs(model.coeffs).sum())
        ok = math.isfinite(lhs) and math.isfinite(inn.norm(m))
        return StationarityReport("pass" if ok else "fail", math.inf if ok else -math.inf,
                                  f"sum |a_k| < inf and ||xi||_{m:g} < inf", lhs)
    if isinstance(model, LinearDepInnov):
        return stationarity_check(model.inner, m)
    raise TypeError(f"unsupported model {type(model).__name__}")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def trunc_lag(model: Model) -> int:
    if isinstance(model, (CausalLinear, TwoSidedLinear, LinearDepInnov)):
        return model.coeffs.size - 1
    if isinstance(model, Garch):
        return garch_to_arch_inf(model).b.size
    if isinstance(model, ArchInf):
        return model.b.size
    if isinstance(model, Bilinear):
        return max(model.a.size, model.c.size)
    if isinstance(model, Volterra):
        return max(max(abs(j) for j in k) for k in model.terms)
    raise TypeError(f"unsupported model {type(model).__name__}")


def burn_in(model: Model) -> int:
    explicit = getattr(model, "burn_in", None)
    return explicit if explicit is not None else max(1000, 10 * trunc_lag(model))


def _linear_filter(coeffs: np.ndarray, lo: int, inn: InnovationSpec, n: int, seed: int,
                   stream: int) -> np.ndarray:
    hi = lo + coeffs.size - 1
    xi = inn.draw(seed, stream, 1 - hi, n - lo)
    return np.convolve(xi, coeffs, mode="valid")


_INNER_STREAM = 1 << 62


def simulate(model: Model, n: int, seed: int, stream: int = 0) -> TimeSeries:
    """Length-``n`` sample; deterministic in ``(model, n, seed, stream)``.

    Recursive families start from the zero state and discard ``burn_in``
    samples. Linear and Volterra families are exactly stationary.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(model, Garch) and not model.a0 > 0:
        raise ValueError("GARCH requires a0 > 0")
    rep = stationarity_check(model, model.innovation.moment_order)
    if rep.status == "fail":
        raise ValueError(f"stationarity condition violated: {rep.inequality} (lhs = {rep.lhs:.6g})")
    inn = model.innovation
    if isinstance(model, CausalLinear):
        x = _linear_filter(model.coeffs, 0, inn, n, seed, stream)
    elif isinstance(model, TwoSidedLinear):
        x = _linear_filter(model.coeffs, model.lo, inn, n, seed, stream)
    elif isinstance(model, Volterra):
        x = _simulate_volterra(model, n, seed, stream)
    elif isinstance(model, LinearDepInnov):
        hi = model.lo + model.coeffs.size - 1
        inner = simulate(model.inner, n + hi - model.lo, seed, stream ^ _INNER_STREAM).values
        # inner sample covers indices 1-hi .. n-lo
        x = np.convolve(inner, model.coeffs, mode="valid")
    else:
        B = burn_in(model)
        xi = np.ascontiguousarray(inn.draw(seed, stream, 1 - B, n))
        if isinstance(model, Garch):
            x = kernels.garch_filter(xi, float(model.a0), np.asarray(model.a, dtype=np.float64),
                                     np.asarray(model.c, dtype=np.float64))
        elif isinstance(model, ArchInf):
            x = kernels.arch_filter(xi, float(model.b0), np.ascontiguousarray(model.b))
        elif isinstance(model, Bilinear):
            x = kernels.bilinear_filter(xi, float(model.a0), np.ascontiguousarray(model.a),
                                        np.ascontiguousarray(model.c))
        else:
            raise TypeError(f"unsupported model {type(model).__name__}")
        x = np.asarray(x)[B:]
    return TimeSeries(x)


def _simulate_volterra(model: Volterra, n: int, seed: int, stream: int) -> np.ndarray:
    inn = model.innovation
    linear = {k[0]: v for k, v in model.terms.items() if len(k) == 1}
    x = np.zeros(n)
    if linear:
        lo, hi = min(linear), max(linear)
        coeffs = np.zeros(hi - lo + 1)
        for j, v in linear.items():
            coeffs[j - lo] = v
        x = _linear_filter(coeffs, lo, inn, n, seed, stream)
    higher = {k: v for k, v in model.terms.items() if len(k) > 1}
    if higher:
        jmin = min(min(k) for k in higher)
        jmax = max(max(k) for k in higher)
        xi = inn.draw(seed, stream, 1 - jmax, n - jmin)
        t0 = 1 - jmax
        base = np.arange(1, n + 1)
        for key, val in sorted(higher.items()):
            prod = np.full(n, val)
            for j in key:
                prod = prod * xi[base - j - t0]
            x = x + prod
    return x


# ---------------------------------------------------------------------------
# exact spectral objects
# ---------------------------------------------------------------------------


def _transfer(coeffs: np.ndarray, lo: int, lam) -> np.ndarray:
    """``A(lam) = sum_j a_j exp(-i j lam)``."""
    lam = np.asarray(lam, dtype=np.float64)
    j = lo + np.arange(coeffs.size)
    return np.exp(-1j * np.multiply.outer(lam, j)) @ coeffs


class LinearCumulants:
    """``kappa4(h, k, l) = c4 sum_j a_j a_{j+h} a_{j+k} a_{j+l}``."""

    def __init__(self, coeffs: np.ndarray, c4: float):
        self.a = np.asarray(coeffs, dtype=np.float64)
        self.c4 = float(c4)

    def _shift(self, j: int, d: np.ndarray) -> np.ndarray:
        idx = j + d
        ok = (idx >= 0) & (idx < self.a.size)
        out = np.zeros(d.shape)
        out[ok] = self.a[idx[ok]]
        return out

    def __call__(self, h, k, l) -> np.ndarray:
        h, k, l = np.broadcast_arrays(np.asarray(h), np.asarray(k), np.asarray(l))
        out = np.zeros(h.shape)
        if self.c4 == 0.0:
            return out
        for j in range(self.a.size):
            if self.a[j] != 0.0:
                out += self.a[j] * self._shift(j, h) * self._shift(j, k) * self._shift(j, l)
        return self.c4 * out

    def abs_sum(self) -> float:
        """``sum_{h,k,l} |kappa4(h,k,l)|`` (exact for short filters, else the
        bound ``|c4| (sum |a_j|)^4``)."""
        if self.c4 == 0.0:
            return 0.0
        L = self.a.size - 1
        if L > 40:
            return abs(self.c4) * float(np.abs(self.a).sum()) ** 4
        d = np.arange(-L, L + 1)
        hh, kk = np.meshgrid(d, d, indexing="ij")
        total = 0.0
        for l in d:
            total += float(np.abs(self(hh, kk, np.full_like(hh, l))).sum())
        return total


def bispectral_linear(model, lam, mu, nu) -> np.ndarray:
    """Bispectral density of a linear process with i.i.d. innovations.

    ``f4(lam, mu, nu) = c4 / (2pi)^3 A(lam+mu+nu) conj(A(lam) A(mu) A(nu))``,
    real whenever the arguments pair up as ``(lam, -mu, mu)``.
    """
    coeffs, lo = _linear_coeffs(model)
    c4 = model.innovation.c4
    lam, mu, nu = np.broadcast_arrays(np.asarray(lam, float), np.asarray(mu, float), np.asarray(nu, float))
    if c4 == 0.0:
        return np.zeros(lam.shape)
    val = c4 / TWO_PI ** 3 * _transfer(coeffs, lo, lam + mu + nu) * np.conj(
        _transfer(coeffs, lo, lam) * _transfer(coeffs, lo, mu) * _transfer(coeffs, lo, nu))
    scale = np.max(np.abs(val)) if val.size else 0.0
    if val.size == 0 or np.max(np.abs(val.imag)) <= 1e-12 * max(scale, 1e-300):
        return val.real
    return val


def _linear_coeffs(model) -> tuple[np.ndarray, int]:
    if isinstance(model, CausalLinear):
        return model.coeffs, 0
    if isinstance(model, TwoSidedLinear):
        return model.coeffs, model.lo
    if isinstance(model, Volterra) and model.order == 1:
        keys = [k[0] for k in model.terms]
        lo, hi = min(keys), max(keys)
        c = np.zeros(hi - lo + 1)
        for k, v in model.terms.items():
            c[k[0] - lo] = v
        return c, lo
    raise TypeError("f4 unavailable: bispectral density is only implemented for linear models")


def _linear_density(coeffs: np.ndarray, lo: int, inn: InnovationSpec, label: str) -> SpectralDensity:
    var = inn.variance
    acov = var * np.correlate(coeffs, coeffs, mode="full")[coeffs.size - 1:]
    kap = LinearCumulants(coeffs, inn.c4)
    holder = TwoSidedLinear(coeffs, lo, inn)
    return SpectralDensity(
        acov,
        density_fn=lambda lam: var / TWO_PI * np.abs(_transfer(coeffs, lo, lam)) ** 2,
        kappa4=kap,
        f4=lambda l1, l2, l3: bispectral_linear(holder, l1, l2, l3),
        kappa4_sum=kap.abs_sum(),
        label=label,
    )


def _geometric_tail_sq(r: np.ndarray) -> float:
    if r.size < 3 or r[-1] == 0.0:
        return 0.0
    q = (r[-1] / r[-2]) ** 2 if r[-2] != 0 else 0.0
    if not q < 1:
        return math.inf
    return float(2.0 * r[-1] ** 2 * q / (1.0 - q))


def _bilinear_density(model: Bilinear, tail: int | None) -> SpectralDensity:
    inn = model.innovation
    var = inn.variance
    if tail is None:
        tail = max(64, model.c.size, model.a.size)
        while True:
            g, _ = bilinear_series_coeffs(model.a, model.c, tail)
            if np.sum(np.abs(g[-max(1, tail // 4):])) < 1e-13 or tail >= MAX_LAGS:
                break
            tail *= 2
    g, h = bilinear_series_coeffs(model.a, model.c, tail)
    hh = var * float(np.sum(h * h))
    if hh >= 1.0:
        raise ValueError(f"sigma^2 * sum h_j^2 = {hh:.6g} >= 1: no stationary second-order solution")
    ev2 = model.a0 ** 2 * var / (1.0 - hh)
    acov = ev2 * np.correlate(g, g, mode="full")[g.size - 1:]
    c = model.c

    def density(lam):
        C = _transfer(c, 1, lam) if c.size else 0.0
        return ev2 / TWO_PI / np.abs(1.0 - C) ** 2

    return SpectralDensity(acov, density_fn=density, tail_sq=_geometric_tail_sq(acov), label="bilinear")


def _volterra_density(model: Volterra) -> SpectralDensity:
    var = model.innovation.variance
    if model.order == 1:
        coeffs, lo = _linear_coeffs(model)
        return _linear_density(coeffs, lo, model.innovation, "volterra")
    span = max(max(k) for k in model.terms) - min(min(k) for k in model.terms)
    acov = np.zeros(span + 1)
    for key, v in model.terms.items():
        for lag in range(span + 1):
            other = model.terms.get(tuple(j + lag for j in key))
            if other is not None:
                acov[lag] += var ** len(key) * v * other
    return SpectralDensity(acov, label="volterra")


def level_spectral_density(model: Model, tail: int | None = None) -> SpectralDensity:
    """Spectral description of ``X`` itself (for ARCH/GARCH: white noise)."""
    if isinstance(model, (ArchInf, Garch)):
        return SpectralDensity(np.array([squared_mean(model)]),
                               density_fn=lambda lam: np.full(np.shape(lam), squared_mean(model) / TWO_PI),
                               label="arch_level")
    return true_spectral_density(model, tail)


def true_spectral_density(model: Model, tail: int | None = None) -> SpectralDensity:
    """Exact autocovariances and density; for ARCH/GARCH those of the squared,
    re-centered process."""
    if isinstance(model, (CausalLinear, TwoSidedLinear)):
        return _linear_density(model.coeffs, model.lo, model.innovation, type(model).__name__)
    if isinstance(model, Bilinear):
        return _bilinear_density(model, tail)
    if isinstance(model, (ArchInf, Garch)):
        return _bilinear_density(arch_squared_transform(model), tail)
    if isinstance(model, Volterra):
        return _volterra_density(model)
    if isinstance(model, LinearDepInnov):
        inner = level_spectral_density(model.inner, tail)
        a = model.coeffs
        rho = np.correlate(a, a, mode="full")  # rho[d + (len-1)] = sum_i a_i a_{i+d}
        d = np.arange(-(a.size - 1), a.size)
        L = inner.L + a.size - 1
        acov = np.array([np.dot(rho, inner.R(k - d)) for k in range(L + 1)])
        lo = model.lo
        return SpectralDensity(
            acov,
            density_fn=lambda lam: inner(lam) * np.abs(_transfer(a, lo, lam)) ** 2,
            tail_sq=inner.tail_sq * float(np.sum(np.abs(a))) ** 4,
            label="linear_dep_innov",
        )
    raise TypeError(f"unsupported model {type(model).__name__}")
