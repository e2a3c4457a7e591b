"""
Two-source Bayesian combining with conjugate priors.

Poisson-gamma for annual event counts and lognormal-normal (known sigma)
for log-severities, together with prior elicitation from expert intervals,
prior transformation through quantile differences, and empirical Bayes
fitting of a gamma prior from a panel of similar risk cells.

Batch posteriors are computed as a left fold of the one-year update, so
the batch and recursive routes agree to the last bit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .distributions import GammaParams, NegBinParams, NormalParams
from .errors import (
    BoundaryEstimateWarning,
    DomainError,
    EmptyDataError,
    NoSolutionError,
    NonIdentifiableWarning,
    SingularJacobianError,
)

__all__ = [
    "AnnualCounts",
    "LogLossSample",
    "ElicitedInterval",
    "QuantileDifferencePrior",
    "CredibilityDecomposition",
    "as_counts",
    "poisson_gamma_posterior",
    "poisson_gamma_posterior_improper",
    "poisson_gamma_update_step",
    "poisson_gamma_trajectory",
    "mle_trajectory",
    "poisson_predictive",
    "credibility_decomposition",
    "fit_gamma_prior_from_interval",
    "gamma_prior_from_vco",
    "interval_coverage",
    "lognormal_normal_posterior",
    "lognormal_normal_update_step",
    "lognormal_credibility_weight",
    "estimate_log_sigma",
    "change_of_variables_density",
    "transform_prior_density",
    "empirical_bayes_loglik",
    "fit_prior_empirical_bayes_poisson",
]

AnnualCounts = Sequence[int]


def as_counts(counts) -> tuple[int, ...]:
    """Validate annual counts and return them as a tuple of ints."""
    out = []
    for n in counts:
        if isinstance(n, (float, np.floating)) and not float(n).is_integer():
            raise DomainError(f"annual counts must be integers, got {n!r}")
        n = int(n)
        if n < 0:
            raise DomainError(f"annual counts must be >= 0, got {n}")
        out.append(n)
    return tuple(out)


# ---------------------------------------------------------------------------
# Poisson-gamma
# ---------------------------------------------------------------------------

def poisson_gamma_update_step(posterior: GammaParams, n_k: int) -> GammaParams:
    """One year of data: ``alpha_k = alpha_{k-1} + n_k``, ``beta_k = beta_{k-1} / (1 + beta_{k-1})``."""
    (n_k,) = as_counts([n_k])
    return GammaParams(posterior.shape + n_k, posterior.scale / (1.0 + posterior.scale))


def poisson_gamma_posterior(prior: GammaParams, data: AnnualCounts) -> GammaParams:
    """
    Gamma posterior of a Poisson intensity after ``T`` years of counts.

    Mathematically ``alpha_T = alpha + sum(n)``, ``beta_T = beta / (1 + beta T)``.
    An empty series returns the prior.

    >>> p = poisson_gamma_posterior(GammaParams(3.407, 0.147), [0, 0])
    >>> round(p.mean(), 3)
    0.385
    """
    return reduce(poisson_gamma_update_step, as_counts(data), prior)


def poisson_gamma_posterior_improper(data: AnnualCounts) -> GammaParams:
    """Posterior under a flat prior: ``Gamma(1 + sum(n), 1 / T)``; its mode is the MLE."""
    counts = as_counts(data)
    if not counts:
        raise EmptyDataError("a flat prior needs at least one year of counts")
    return GammaParams(1.0 + sum(counts), 1.0 / len(counts))


def poisson_gamma_trajectory(prior: GammaParams, data: AnnualCounts) -> list[GammaParams]:
    """Posteriors after each year ``k = 1..T`` (prior excluded)."""
    out = []
    post = prior
    for n in as_counts(data):
        post = poisson_gamma_update_step(post, n)
        out.append(post)
    return out


def mle_trajectory(data: AnnualCounts) -> np.ndarray:
    """Running maximum likelihood intensity ``(1/k) sum_{i<=k} n_i``."""
    counts = np.asarray(as_counts(data), dtype=float)
    return np.cumsum(counts) / np.arange(1, counts.size + 1)


def poisson_predictive(posterior: GammaParams) -> NegBinParams:
    """Predictive count for next year: ``NegBin(alpha_T, 1 / (1 + beta_T))``."""
    return NegBinParams(posterior.shape, 1.0 / (1.0 + posterior.scale))


class CredibilityDecomposition(NamedTuple):
    weight: float
    mle: float
    prior_mean: float
    posterior_mean: float
    has_data: bool


def credibility_decomposition(prior: GammaParams, data: AnnualCounts) -> CredibilityDecomposition:
    """
    Split the posterior mean into ``w * MLE + (1 - w) * prior_mean``.

    ``w = T beta / (T beta + 1)``. With no data the MLE is reported as 0 and
    ``has_data`` is False; it carries zero weight.
    """
    counts = as_counts(data)
    t = len(counts)
    w = t * prior.scale / (t * prior.scale + 1.0)
    mle = sum(counts) / t if t else 0.0
    prior_mean = prior.mean()
    post_mean = prior.scale * (prior.shape + sum(counts)) / (1.0 + prior.scale * t)
    return CredibilityDecomposition(w, mle, prior_mean, post_mean, t > 0)


# ---------------------------------------------------------------------------
# Prior elicitation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElicitedInterval:
    """Expert mean of the intensity and ``Pr[lower <= Lambda <= upper] = coverage``."""

    mean_estimate: float
    lower: float
    upper: float
    coverage: float

    def __post_init__(self):
        if not self.mean_estimate > 0:
            raise DomainError("mean_estimate must be > 0")
        if not 0 < self.lower < self.upper:
            raise DomainError(f"need 0 < lower < upper, got [{self.lower}, {self.upper}]")
        if not 0 < self.coverage < 1:
            raise DomainError(f"coverage must lie in (0, 1), got {self.coverage}")


def interval_coverage(shape: float, e: ElicitedInterval) -> float:
    """``F(upper) - F(lower)`` for the gamma with the elicited mean and given shape."""
    scale = e.mean_estimate / shape
    return float(special.gammainc(shape, e.upper / scale) - special.gammainc(shape, e.lower / scale))


_SHAPE_RANGE = (1e-4, 1e6)


def fit_gamma_prior_from_interval(e: ElicitedInterval) -> GammaParams:
    """
    Gamma prior matching an elicited mean and interval coverage.

    The scale is eliminated through ``scale = mean / shape`` and the
    coverage equation is solved by bisection on ``log(shape)`` over
    ``[1e-4, 1e6]``.

    Raises
    ------
    NoSolutionError
        If the coverage cannot be reached by any gamma with that mean in
        the search range; ``err.attainable`` holds the attainable range.
    """
    lo, hi = (math.log(v) for v in _SHAPE_RANGE)
    c_lo = interval_coverage(math.exp(lo), e) - e.coverage
    c_hi = interval_coverage(math.exp(hi), e) - e.coverage
    attainable = (c_lo + e.coverage, c_hi + e.coverage)
    if c_lo * c_hi > 0:
        side = "shape -> infinity" if e.coverage >= max(attainable) else "shape -> 0"
        raise NoSolutionError(
            f"coverage {e.coverage} not attainable with mean {e.mean_estimate} on [{e.lower}, {e.upper}]; "
            f"attainable range is [{min(attainable):.6g}, {max(attainable):.6g}] (boundary: {side})",
            attainable=(min(attainable), max(attainable)),
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        c_mid = interval_coverage(math.exp(mid), e) - e.coverage
        if c_mid == 0.0 or hi - lo < 1e-15:
            break
        if (c_mid < 0) == (c_lo < 0):
            lo, c_lo = mid, c_mid
        else:
            hi = mid
    shape = math.exp(0.5 * (lo + hi))
    return GammaParams(shape, e.mean_estimate / shape)


def gamma_prior_from_vco(mean: float, vco: float) -> GammaParams:
    """Gamma prior from its mean and coefficient of variation ``1 / sqrt(shape)``."""
    if not (mean > 0 and vco > 0):
        raise DomainError("mean and vco must be > 0")
    shape = 1.0 / (vco * vco)
    return GammaParams(shape, mean / shape)


# ---------------------------------------------------------------------------
# Lognormal-normal (known sigma)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogLossSample:
    """Log-severities ``y_i = ln x_i`` with the severity sigma treated as known."""

    values: tuple[float, ...]
    known_sigma: float

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.known_sigma > 0:
            raise DomainError(f"known_sigma must be > 0, got {self.known_sigma}")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("log-loss values must be finite")

    @classmethod
    def from_losses(cls, losses, known_sigma: float) -> "LogLossSample":
        x = np.asarray(losses, dtype=float)
        if np.any(x <= 0):
            raise DomainError("losses must be > 0")
        return cls(tuple(np.log(x)), known_sigma)

    def __len__(self):
        return len(self.values)


def lognormal_normal_posterior(prior: NormalParams, data: LogLossSample) -> NormalParams:
    """
    Normal posterior of the lognormal ``mu``.

    With ``omega = sigma0^2 / sigma^2``:
    ``mu_n = (mu0 + omega sum(y)) / (1 + n omega)`` and
    ``sigma_n^2 = sigma0^2 / (1 + n omega)``.
    """
    n = len(data.values)
    if n == 0:
        return prior
    omega = prior.stdev ** 2 / data.known_sigma ** 2
    denom = 1.0 + n * omega
    mu = (prior.mean + omega * math.fsum(data.values)) / denom
    return NormalParams(mu, math.sqrt(prior.stdev ** 2 / denom))


def lognormal_normal_update_step(posterior: NormalParams, y_k: float, sigma: float) -> NormalParams:
    """Fold in one log-loss using only the previous posterior."""
    if not sigma > 0:
        raise DomainError("sigma must be > 0")
    w = posterior.stdev ** 2 / sigma ** 2
    mu = (posterior.mean + w * y_k) / (1.0 + w)
    return NormalParams(mu, math.sqrt(sigma ** 2 * w / (1.0 + w)))


def lognormal_credibility_weight(prior: NormalParams, n: int, sigma: float) -> float:
    """``w_n = n / (n + sigma^2 / sigma0^2)``."""
    return n / (n + sigma ** 2 / prior.stdev ** 2)


def estimate_log_sigma(values) -> float:
    """
    Method-of-moments sigma from log-losses (sample standard deviation).

    Offered as an explicit convenience; the posterior routines never call it.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise EmptyDataError("need at least two log-losses to estimate sigma")
    return float(np.std(v, ddof=1))


# ---------------------------------------------------------------------------
# Prior transformation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileDifferencePrior:
    """
    Independent gamma priors on quantile differences ``d_1 = q_1``,
    ``d_i = q_i - q_{i-1}`` at ascending levels ``p_1 < ... < p_n``.
    """

    levels: tuple[float, ...]
    difference_priors: tuple[GammaParams, ...]

    def __post_init__(self):
        levels = tuple(float(p) for p in self.levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "difference_priors", tuple(self.difference_priors))
        if len(levels) != len(self.difference_priors) or not levels:
            raise DomainError("need one difference prior per level")
        if not all(0 < p < 1 for p in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError("levels must be strictly ascending in (0, 1)")

    def log_density(self, d) -> float:
        d = np.asarray(d, dtype=float)
        if np.any(d <= 0):
            return -math.inf
        return math.fsum(float(g.logpdf(x)) for g, x in zip(self.difference_priors, d))


def _jacobian(g: Callable, theta: np.ndarray, rel_step: float) -> np.ndarray:
    base = np.asarray(g(theta), dtype=float)
    jac = np.empty((base.size, theta.size))
    for j in range(theta.size):
        h = rel_step * (abs(theta[j]) if theta[j] != 0 else 1.0)
        up = theta.copy()
        dn = theta.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (np.asarray(g(up), dtype=float) - np.asarray(g(dn), dtype=float)) / (2.0 * h)
    return jac


def change_of_variables_density(
    characteristic_density: Callable[[np.ndarray], float],
    g: Callable[[np.ndarray], np.ndarray],
    rel_step: float = 1e-6,
) -> Callable[[Sequence[float]], float]:
    """
    Density of parameters ``theta`` implied by a density on ``g(theta)``.

    ``pi(theta) = pi_d(g(theta)) |det dg/dtheta|`` with the Jacobian taken by
    central finite differences. The returned evaluator raises
    :class:`SingularJacobianError` when ``|det J| < 1e-12``.
    """

    def density(theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        value = characteristic_density(np.asarray(g(theta), dtype=float))
        if value == 0.0:
            return 0.0
        det = abs(float(np.linalg.det(_jacobian(g, theta, rel_step))))
        if det < 1e-12:
            raise SingularJacobianError(f"|det J| = {det:.3g} at theta = {theta.tolist()}")
        return value * det

    return density


def transform_prior_density(
    prior: QuantileDifferencePrior,
    quantile_fn: Callable[[np.ndarray, float], float],
    rel_step: float = 1e-6,
) -> Callable[[Sequence[float]], float]:
    """
    Prior density over family parameters from priors on quantile differences.

    Parameters
    ----------
    prior : QuantileDifferencePrior
    quantile_fn : callable
        ``quantile_fn(theta, p)`` returns the family quantile at level ``p``
        for parameter vector ``theta``; this describes the severity or
        frequency family.
    rel_step : float
        Relative finite-difference step for the Jacobian.

    Returns
    -------
    callable
        ``density(theta)``; zero whenever a quantile difference is not
        strictly positive.
    """

    def differences(theta):
        q = np.array([quantile_fn(theta, p) for p in prior.levels], dtype=float)
        return np.diff(q, prepend=0.0)

    def char_density(d):
        return math.exp(prior.log_density(d))

    return change_of_variables_density(char_density, differences, rel_step)


# ---------------------------------------------------------------------------
# Empirical Bayes
# ---------------------------------------------------------------------------

def _cell_stats(cells):
    cells = [as_counts(c) for c in cells]
    if len(cells) < 2 or any(len(c) == 0 for c in cells):
        raise DomainError("empirical Bayes needs at least two cells with at least one year each")
    sums = np.array([sum(c) for c in cells], dtype=float)
    years = np.array([len(c) for c in cells], dtype=float)
    return cells, sums, years


def empirical_bayes_loglik(shape: float, scale: float, cells) -> float:
    """
    Log marginal likelihood of a panel of cells under a gamma prior.

    Each cell contributes the integral of its Poisson likelihood against the
    prior, ``Gamma(a+S)/Gamma(a) b^S (1 + T b)^-(a+S) / prod(n!)``.
    """
    cells, s, t = _cell_stats(cells)
    const = -math.fsum(special.gammaln(n + 1.0) for c in cells for n in c)
    terms = (
        special.gammaln(shape + s)
        - special.gammaln(shape)
        + s * math.log(scale)
        - (shape + s) * np.log1p(t * scale)
    )
    return math.fsum(terms) + const


def _grad_hess(a, b, s, t):
    tb = 1.0 + t * b
    ga = math.fsum(special.digamma(a + s) - special.digamma(a) - np.log(tb))
    gb = math.fsum(s / b - (a + s) * t / tb)
    haa = math.fsum(special.polygamma(1, a + s) - special.polygamma(1, a))
    hab = math.fsum(-t / tb)
    hbb = math.fsum(-s / b ** 2 + (a + s) * t ** 2 / tb ** 2)
    return np.array([ga, gb]), np.array([[haa, hab], [hab, hbb]])


_SHAPE_CAP = 1e8


def fit_prior_empirical_bayes_poisson(cells) -> GammaParams:
    """
    Maximum marginal likelihood gamma prior from similar risk cells.

    Parameters
    ----------
    cells : sequence of sequences of int
        Annual counts per cell; at least two cells with one year each.

    Returns
    -------
    GammaParams
        Maximiser of the product of negative binomial marginals.

    Warns
    -----
    NonIdentifiableWarning
        All cells carry identical constant counts.
    BoundaryEstimateWarning
        The between-cell spread is no larger than Poisson noise, so the
        likelihood keeps increasing as ``shape -> infinity``; the shape is
        capped and the prior mean is matched.

    Raises
    ------
    NoSolutionError
        Every count is zero (the optimum is a prior mean of zero).
    """
    cells, s, t = _cell_stats(cells)
    if s.sum() == 0:
        raise NoSolutionError("all counts are zero: optimum on the boundary prior mean -> 0")

    rates = s / t
    mean = float(s.sum() / t.sum())
    flat = [n for c in cells for n in c]
    if len(set(flat)) == 1:
        warnings.warn("all cells carry identical constant counts; prior spread is not identified",
                      NonIdentifiableWarning, stacklevel=2)
        return GammaParams(_SHAPE_CAP, float(mean / _SHAPE_CAP))

    # score for extra-Poisson spread at shape = infinity; no overdispersion
    # means the likelihood is maximised on that boundary
    overdispersion = float(np.sum((s - t * mean) ** 2 - s))
    if overdispersion <= 0:
        warnings.warn("no between-cell spread beyond Poisson noise; likelihood increases "
                      "without bound in the prior shape, returning a capped shape",
                      BoundaryEstimateWarning, stacklevel=2)
        return GammaParams(_SHAPE_CAP, float(mean / _SHAPE_CAP))
    between = max(float(np.var(rates, ddof=1)) - mean * float(np.mean(1.0 / t)), 0.05 * mean * mean)

    # Newton in log-coordinates with backtracking, then polish in natural ones
    x = np.log([mean * mean / between, between / mean])

    def f(v):
        return empirical_bayes_loglik(math.exp(v[0]), math.exp(v[1]), cells)

    fx = f(x)
    for _ in range(500):
        a, b = np.exp(x)
        g, h = _grad_hess(a, b, s, t)
        gl = g * np.array([a, b])
        hl = h * np.outer([a, b], [a, b]) + np.diag(gl)
        try:
            step = -np.linalg.solve(hl, gl)
            if gl @ step <= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = gl / max(1.0, np.abs(gl).max())
        lam = 1.0
        while lam > 1e-12:
            cand = x + lam * step
            fc = f(cand)
            if fc >= fx:
                break
            lam *= 0.5
        else:
            break
        x, fx_old, fx = cand, fx, fc
        if math.exp(x[0]) > _SHAPE_CAP:
            warnings.warn("likelihood increases without bound in the prior shape; "
                          "returning a capped shape with the pooled mean",
                          BoundaryEstimateWarning, stacklevel=2)
            return GammaParams(_SHAPE_CAP, float(mean / _SHAPE_CAP))
        if np.max(np.abs(lam * step)) < 1e-13 and abs(fx - fx_old) < 1e-14 * max(1.0, abs(fx)):
            break

    a, b = np.exp(x)
    for _ in range(20):
        g, h = _grad_hess(a, b, s, t)
        if np.max(np.abs(g)) < 1e-10:
            break
        try:
            da, db = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            break
        if a + da <= 0 or b + db <= 0:
            break
        a, b = a + da, b + db
    return GammaParams(float(a), float(b))
