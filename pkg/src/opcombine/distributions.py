"""
Distribution families and special functions shared by every combiner.

Each parameter record is a frozen dataclass that validates itself on
construction and carries ``pdf``/``cdf``/``quantile``/``sample`` methods.
Continuous quantiles are obtained by bracketed root-finding on the cdf
(geometric or arithmetic bisection down to 1e-10 in probability, then a
Newton polish), so every family, including the GIG, goes through one code
path.

The modified Bessel function of the third kind is evaluated by adaptive
quadrature of its integral representation

.. math::
    K_\\nu(z) = \\int_0^\\infty e^{-z\\cosh t}\\cosh(\\nu t)\\,dt,

which is the ``u = e^t`` substitution of
:math:`K_{\\nu+1}(z) = \\tfrac12\\int_0^\\infty u^\\nu e^{-z(u+1/u)/2}du`.
The integrand is located and rescaled by its maximum, so ``log_bessel_k``
stays finite for orders in the thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import DegenerateParameterError, DomainError

__all__ = [
    "make_rng",
    "log_bessel_k",
    "bessel_k",
    "GammaParams",
    "NormalParams",
    "LognormalParams",
    "BetaParams",
    "PoissonParams",
    "NegBinParams",
    "GIGParams",
    "PointMass",
    "gig_mean",
    "gig_mode",
    "gig_variance",
]

# Below this Bessel argument the GIG is treated through its gamma /
# inverse-gamma limit instead of forming Bessel ratios.
GIG_LIMIT_ARGUMENT = 1e-8

_PROB_TOL = 1e-10


def make_rng(seed: int) -> np.random.Generator:
    """Return a Philox (64-bit counter-based) generator for ``seed``."""
    if seed is None:
        raise DomainError("an explicit integer seed is required")
    return np.random.Generator(np.random.Philox(int(seed)))


def _check_prob(p, open_interval=True):
    p = float(p)
    if not math.isfinite(p) or p < 0.0 or p > 1.0 or (open_interval and p in (0.0, 1.0)):
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    return p


# ---------------------------------------------------------------------------
# Bessel K
# ---------------------------------------------------------------------------

def _log_cosh(x):
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def log_bessel_k(nu: float, z: float) -> float:
    """
    Natural logarithm of the modified Bessel function of the third kind.

    Parameters
    ----------
    nu : float
        Order; any real value (``K_{-nu} = K_nu``).
    z : float
        Argument, strictly positive.

    Returns
    -------
    float
        ``log K_nu(z)``.

    Raises
    ------
    DomainError
        If ``z <= 0`` or either argument is not finite.
    """
    nu = abs(float(nu))
    z = float(z)
    if not (math.isfinite(nu) and math.isfinite(z)) or z <= 0.0:
        raise DomainError(f"bessel_k needs finite nu and z > 0, got nu={nu}, z={z}")

    def h(t):
        return _log_cosh(nu * t) - z * math.cosh(t)

    def dh(t):
        return nu * math.tanh(nu * t) - z * math.sinh(t)

    # h''(0) = nu^2 - z; the maximum is interior only when that is positive
    if nu * nu > z:
        hi = math.asinh(nu / z)
        lo = min(1e-3 * hi, 1e-3)
        while dh(lo) <= 0.0 and lo > 1e-300:
            lo *= 1e-3
        t_star = hi if dh(hi) >= 0.0 else optimize.brentq(dh, lo, hi, xtol=1e-15, rtol=1e-15)
    else:
        t_star = 0.0
    h_max = h(t_star)

    a = abs(nu * t_star)
    sech2 = (2.0 * math.exp(-a) / (1.0 + math.exp(-2.0 * a))) ** 2
    curvature = abs(nu * nu * sech2 - z * math.cosh(t_star))
    width = 1.0 / math.sqrt(max(curvature, 1e-300))
    width = min(width, 50.0)
    t_end = t_star + width
    while h(t_end) - h_max > -80.0:
        width *= 1.5
        t_end += width

    def integrand(t):
        return math.exp(h(t) - h_max)

    points = [t_star] if t_star > 0.0 else None
    val, _ = integrate.quad(
        integrand, 0.0, t_end, points=points, epsabs=0.0, epsrel=1e-13, limit=400
    )
    return h_max + math.log(val)


def bessel_k(nu: float, z: float) -> float:
    """
    Modified Bessel function of the third kind ``K_nu(z)``.

    >>> round(bessel_k(0.5, 1.0), 10) == round(math.sqrt(math.pi / 2) * math.exp(-1), 10)
    True
    """
    return math.exp(log_bessel_k(nu, z))


# ---------------------------------------------------------------------------
# Generic cdf inversion
# ---------------------------------------------------------------------------

def _invert_cdf(
    p: float,
    cdf: Callable[[float], float],
    pdf: Callable[[float], float],
    lo: float,
    hi: float,
    positive: bool = False,
) -> float:
    """Bracketed bisection on ``cdf(x) = p`` followed by a Newton polish."""
    # grow the bracket until it straddles p
    if positive:
        while cdf(lo) > p:
            lo *= 1e-2
            if lo < 1e-300:
                return 0.0
        while cdf(hi) < p:
            lo, hi = hi, hi * 10.0
    else:
        step = max(1.0, hi - lo)
        while cdf(lo) > p:
            hi, lo = lo, lo - step
            step *= 2.0
        while cdf(hi) < p:
            lo, hi = hi, hi + step
            step *= 2.0

    tol = _PROB_TOL * min(p, 1.0 - p, 0.5)
    x = 0.5 * (lo + hi)
    for _ in range(400):
        x = math.sqrt(lo * hi) if positive and lo > 0.0 else 0.5 * (lo + hi)
        fx = cdf(x) - p
        if abs(fx) < tol:
            break
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4.0 * np.finfo(float).eps * max(abs(lo), abs(hi), 1e-300):
            break

    for _ in range(8):
        d = pdf(x)
        if not d > 0.0 or not math.isfinite(d):
            break
        step = (cdf(x) - p) / d
        x_new = x - step
        if not lo <= x_new <= hi:
            break
        if abs(step) <= 2.0 * np.finfo(float).eps * max(abs(x), 1e-300):
            x = x_new
            break
        x = x_new
    return x


# ---------------------------------------------------------------------------
# Continuous families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaParams:
    """Gamma distribution with ``shape`` (alpha) and ``scale`` (beta)."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError(f"gamma shape must be > 0, got {self.shape}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"gamma scale must be > 0, got {self.scale}")

    def mean(self) -> float:
        return self.shape * self.scale

    def var(self) -> float:
        return self.shape * self.scale ** 2

    def std(self) -> float:
        return self.scale * math.sqrt(self.shape)

    def mode(self) -> float:
        return max(self.shape - 1.0, 0.0) * self.scale

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                special.xlogy(self.shape - 1.0, x)
                - x / self.scale
                - special.gammaln(self.shape)
                - self.shape * math.log(self.scale)
            )
        return np.where(x > 0, out, -np.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(self.logpdf(x))
        if self.shape == 1.0:
            out = np.where(x == 0, 1.0 / self.scale, out)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = special.gammainc(self.shape, np.maximum(x, 0.0) / self.scale)
        return out[()] if out.ndim == 0 else out

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        out = special.gammaincc(self.shape, np.maximum(x, 0.0) / self.scale)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p: float) -> float:
        p = _check_prob(p)
        m = self.mean()
        return _invert_cdf(p, lambda x: float(self.cdf(x)), lambda x: float(self.pdf(x)),
                           0.5 * m, 2.0 * m, positive=True)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, self.scale, size=size)


@dataclass(frozen=True)
class NormalParams:
    """Normal distribution with ``mean`` and standard deviation ``stdev``."""

    mean: float
    stdev: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise DomainError(f"normal mean must be finite, got {self.mean}")
        if not (self.stdev > 0 and math.isfinite(self.stdev)):
            raise DomainError(f"normal stdev must be > 0, got {self.stdev}")

    def var(self) -> float:
        return self.stdev ** 2

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        zz = (x - self.mean) / self.stdev
        return -0.5 * zz * zz - math.log(self.stdev) - 0.5 * math.log(2.0 * math.pi)

    def pdf(self, x):
        out = np.exp(self.logpdf(x))
        return out[()] if np.ndim(out) == 0 else out

    def cdf(self, x):
        out = special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.stdev)
        return out[()] if np.ndim(out) == 0 else out

    def quantile(self, p: float) -> float:
        p = _check_prob(p)
        # root-find on the standard normal, where cdf tails are resolved in both directions
        if p <= 0.5:
            zz = _invert_cdf(p, lambda t: float(special.ndtr(t)), _std_normal_pdf, -1.0, 1.0)
        else:
            zz = -_invert_cdf(1.0 - p, lambda t: float(special.ndtr(t)), _std_normal_pdf, -1.0, 1.0)
        return self.mean + self.stdev * zz

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, self.stdev, size=size)


def _std_normal_pdf(t):
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LognormalParams:
    """Lognormal distribution: ``ln X ~ N(mu, sigma)``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise DomainError(f"lognormal mu must be finite, got {self.mu}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"lognormal sigma must be > 0, got {self.sigma}")

    @property
    def log_normal(self) -> NormalParams:
        return NormalParams(self.mu, self.sigma)

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    def var(self) -> float:
        s2 = self.sigma ** 2
        return math.expm1(s2) * math.exp(2.0 * self.mu + s2)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(np.where(x > 0, x, 1.0))
            out = np.exp(self.log_normal.logpdf(lx) - lx)
        out = np.where(x > 0, out, 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, special.ndtr((np.log(np.where(x > 0, x, 1.0)) - self.mu) / self.sigma), 0.0)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p: float) -> float:
        return math.exp(self.log_normal.quantile(p))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.lognormal(self.mu, self.sigma, size=size)


@dataclass(frozen=True)
class BetaParams:
    """Beta distribution with shape parameters ``a`` and ``b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError(f"beta shapes must be > 0, got ({self.a}, {self.b})")

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def var(self) -> float:
        s = self.a + self.b
        return self.a * self.b / (s * s * (s + 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xc = np.where(inside, x, 0.5)
        with np.errstate(divide="ignore"):
            out = np.exp(
                special.xlogy(self.a - 1.0, xc) + special.xlog1py(self.b - 1.0, -xc) - special.betaln(self.a, self.b)
            )
        out = np.where(inside, out, 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = special.betainc(self.a, self.b, x)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p: float) -> float:
        p = _check_prob(p)
        cdf = lambda x: float(self.cdf(x))  # noqa: E731
        pdf = lambda x: float(self.pdf(x))  # noqa: E731
        if p <= 0.5:
            return _bisect_unit(p, cdf, pdf)
        # resolve the upper tail through the mirrored distribution
        mirror = BetaParams(self.b, self.a)
        return 1.0 - _bisect_unit(1.0 - p, lambda x: float(mirror.cdf(x)), lambda x: float(mirror.pdf(x)))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.beta(self.a, self.b, size=size)


def _bisect_unit(p, cdf, pdf):
    lo, hi = 0.0, 1.0
    # geometric search on the lower tail first; very small shapes push mass to 0
    x = 0.5
    while cdf(x) > p and x > 1e-300:
        hi = x
        x *= 1e-3
    lo = x if cdf(x) <= p else 0.0
    return _invert_cdf(p, cdf, pdf, max(lo, 1e-300), hi, positive=True)


# ---------------------------------------------------------------------------
# Discrete families
# ---------------------------------------------------------------------------

def _discrete_quantile(p, cdf, start):
    k = int(max(start, 0))
    if cdf(k) >= p:
        while k > 0 and cdf(k - 1) >= p:
            k -= 1
        return k
    step = 1
    lo = k
    hi = k + step
    while cdf(hi) < p:
        lo = hi
        step *= 2
        hi = hi + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cdf(mid) >= p:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class PoissonParams:
    """Poisson distribution with intensity ``rate`` (zero allowed)."""

    rate: float

    def __post_init__(self):
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise DomainError(f"Poisson rate must be >= 0, got {self.rate}")

    def mean(self) -> float:
        return self.rate

    def var(self) -> float:
        return self.rate

    def pmf(self, k):
        k = np.asarray(k)
        kf = k.astype(float)
        with np.errstate(divide="ignore"):
            out = np.exp(special.xlogy(kf, self.rate) - self.rate - special.gammaln(kf + 1.0))
        out = np.where((k >= 0) & (np.floor(kf) == kf), out, 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf(self, k):
        kf = np.floor(np.asarray(k, dtype=float))
        out = np.where(kf >= 0, special.pdtr(np.maximum(kf, 0.0), self.rate), 0.0)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p: float) -> int:
        p = _check_prob(p)
        return _discrete_quantile(p, lambda k: float(self.cdf(k)), math.floor(self.rate))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.poisson(self.rate, size=size)


@dataclass(frozen=True)
class NegBinParams:
    """
    Negative binomial with ``size`` and success probability ``prob``.

    ``pmf(m) = Gamma(size + m) / (Gamma(size) m!) prob^size (1 - prob)^m``.
    """

    size: float
    prob: float

    def __post_init__(self):
        if not (self.size > 0 and math.isfinite(self.size)):
            raise DomainError(f"negative binomial size must be > 0, got {self.size}")
        if not 0.0 < self.prob < 1.0:
            raise DomainError(f"negative binomial prob must lie in (0, 1), got {self.prob}")

    def mean(self) -> float:
        return self.size * (1.0 - self.prob) / self.prob

    def var(self) -> float:
        return self.size * (1.0 - self.prob) / self.prob ** 2

    def pmf(self, k):
        k = np.asarray(k)
        kf = k.astype(float)
        out = np.exp(
            special.gammaln(self.size + kf)
            - special.gammaln(self.size)
            - special.gammaln(kf + 1.0)
            + self.size * math.log(self.prob)
            + kf * math.log1p(-self.prob)
        )
        out = np.where((k >= 0) & (np.floor(kf) == kf), out, 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf(self, k):
        kf = np.floor(np.asarray(k, dtype=float))
        out = np.where(kf >= 0, special.betainc(self.size, np.maximum(kf, 0.0) + 1.0, self.prob), 0.0)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p: float) -> int:
        p = _check_prob(p)
        return _discrete_quantile(p, lambda k: float(self.cdf(k)), math.floor(self.mean()))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.negative_binomial(self.size, self.prob, size=size)


@dataclass(frozen=True)
class PointMass:
    """Degenerate distribution at ``value``; handy for frequency-only checks."""

    value: float

    def mean(self) -> float:
        return self.value

    def var(self) -> float:
        return 0.0

    def cdf(self, x):
        out = np.where(np.asarray(x, dtype=float) >= self.value, 1.0, 0.0)
        return out[()] if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size=None):
        return np.full(size, float(self.value)) if size is not None else float(self.value)


# ---------------------------------------------------------------------------
# Generalised inverse Gaussian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GIGParams:
    """
    Generalised inverse Gaussian with density proportional to
    ``x**nu * exp(-omega * x - phi / x)``.

    ``phi == 0`` is the gamma distribution with shape ``nu + 1`` and scale
    ``1 / omega``; it is accepted only when ``nu + 1 > 0``.
    """

    nu: float
    omega: float
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.nu):
            raise DomainError(f"GIG nu must be finite, got {self.nu}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"GIG omega must be > 0, got {self.omega}")
        if not (self.phi >= 0 and math.isfinite(self.phi)):
            raise DomainError(f"GIG phi must be >= 0, got {self.phi}")
        if self.phi == 0 and not self.nu + 1.0 > 0:
            raise DomainError("GIG with phi = 0 needs nu + 1 > 0 to be normalisable")

    @property
    def bessel_argument(self) -> float:
        return 2.0 * math.sqrt(self.omega * self.phi)

    def as_gamma(self) -> GammaParams:
        """The gamma distribution reached as ``phi -> 0``."""
        if not self.nu + 1.0 > 0:
            raise DegenerateParameterError("gamma limit needs nu + 1 > 0")
        return GammaParams(self.nu + 1.0, 1.0 / self.omega)

    def log_normalizer(self) -> float:
        """Log of ``(omega/phi)^((nu+1)/2) / (2 K_{nu+1}(2 sqrt(omega phi)))``."""
        if self.phi == 0:
            g = self.as_gamma()
            return -special.gammaln(g.shape) - g.shape * math.log(g.scale)
        return (
            0.5 * (self.nu + 1.0) * math.log(self.omega / self.phi)
            - math.log(2.0)
            - log_bessel_k(self.nu + 1.0, self.bessel_argument)
        )

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xc = np.where(pos, x, 1.0)
        out = self.log_normalizer() + self.nu * np.log(xc) - self.omega * xc - self.phi / xc
        out = np.where(pos, out, -np.inf)
        return out[()] if out.ndim == 0 else out

    def pdf(self, x):
        out = np.exp(self.logpdf(x))
        return out[()] if np.ndim(out) == 0 else out

    def cdf(self, x):
        x = float(x)
        if x <= 0:
            return 0.0
        if self.phi == 0:
            return float(self.as_gamma().cdf(x))
        c = self.log_normalizer()

        def f(t):
            return math.exp(c + self.nu * math.log(t) - self.omega * t - self.phi / t) if t > 0 else 0.0

        m = gig_mode(self)
        if x <= m:
            val, _ = integrate.quad(f, 0.0, x, epsabs=0.0, epsrel=1e-12, limit=200)
            return min(max(val, 0.0), 1.0)
        val, _ = integrate.quad(f, x, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        return min(max(1.0 - val, 0.0), 1.0)

    def quantile(self, p: float) -> float:
        p = _check_prob(p)
        guess = max(gig_mode(self), 1e-8)
        return _invert_cdf(p, self.cdf, lambda t: float(self.pdf(t)), 0.5 * guess, 2.0 * guess, positive=True)

    def sample(self, rng: np.random.Generator, size=None):
        if self.phi == 0:
            return self.as_gamma().sample(rng, size)
        return stats.geninvgauss.rvs(
            self.nu + 1.0,
            self.bessel_argument,
            scale=math.sqrt(self.phi / self.omega),
            size=size,
            random_state=rng,
        )


def _gig_moment_ratio(p: GIGParams, order: int) -> float:
    """``E[X**order]`` through Bessel ratios."""
    z = p.bessel_argument
    return math.exp(
        0.5 * order * math.log(p.phi / p.omega)
        + log_bessel_k(p.nu + 1.0 + order, z)
        - log_bessel_k(p.nu + 1.0, z)
    )


def _gig_limit_moment(p: GIGParams, order: int) -> float:
    shape = p.nu + 1.0
    if shape > 0:
        # gamma limit: E[X^k] = scale^k Gamma(shape + k) / Gamma(shape)
        return math.exp(order * -math.log(p.omega) + special.gammaln(shape + order) - special.gammaln(shape))
    # inverse-gamma limit with shape -(nu+1) and scale phi
    a = -shape
    if a <= order:
        return math.inf
    return math.exp(order * math.log(p.phi) + special.gammaln(a - order) - special.gammaln(a))


def gig_mean(p: GIGParams, gamma_limit: bool = False) -> float:
    """
    Mean of a GIG, ``sqrt(phi/omega) K_{nu+2}(z) / K_{nu+1}(z)``, ``z = 2 sqrt(omega phi)``.

    Parameters
    ----------
    p : GIGParams
    gamma_limit : bool, default False
        Permit ``phi == 0``, in which case the gamma mean ``(nu + 1) / omega``
        is returned.

    Raises
    ------
    DegenerateParameterError
        If ``phi == 0`` and ``gamma_limit`` is False.
    """
    if p.phi == 0:
        if not gamma_limit:
            raise DegenerateParameterError("phi = 0: pass gamma_limit=True to use the gamma mean")
        return p.as_gamma().mean()
    if p.bessel_argument <= GIG_LIMIT_ARGUMENT:
        return _gig_limit_moment(p, 1)
    return _gig_moment_ratio(p, 1)


def gig_variance(p: GIGParams, gamma_limit: bool = False) -> float:
    """Variance of a GIG through ``E[X^2] = (phi/omega) K_{nu+3} / K_{nu+1}``."""
    if p.phi == 0:
        if not gamma_limit:
            raise DegenerateParameterError("phi = 0: pass gamma_limit=True to use the gamma variance")
        return p.as_gamma().var()
    if p.bessel_argument <= GIG_LIMIT_ARGUMENT:
        m1, m2 = _gig_limit_moment(p, 1), _gig_limit_moment(p, 2)
    else:
        m1, m2 = _gig_moment_ratio(p, 1), _gig_moment_ratio(p, 2)
    return m2 - m1 * m1


def gig_mode(p: GIGParams) -> float:
    """Mode ``(nu + sqrt(nu^2 + 4 omega phi)) / (2 omega)``."""
    nu = p.nu
    disc = math.sqrt(nu * nu + 4.0 * p.omega * p.phi)
    if nu < 0:
        # rationalised to avoid cancellation when phi is small
        return 2.0 * p.phi / (disc - nu)
    return (nu + disc) / (2.0 * p.omega)
