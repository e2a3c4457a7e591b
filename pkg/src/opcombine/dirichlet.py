"""
Dirichlet-process blending of a scenario severity curve with loss data.

The scenario analysis supplies a base distribution ``H`` at a handful of
points and the caller picks a concentration ``alpha`` that acts like an
equivalent sample size (scenario-based values are usually small, often
below ten). Given data the base updates to
``(alpha H + n F_n) / (alpha + n)`` and the marginal of ``F(x)`` is
``Beta(alpha H(x), alpha (1 - H(x)))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import BetaParams
from .errors import DomainError

__all__ = [
    "StepDistribution",
    "BlendedBase",
    "DirichletPrior",
    "dp_posterior",
    "dp_marginal_band",
    "band_columns",
]


@dataclass(frozen=True)
class StepDistribution:
    """
    Distribution function known at ascending knots.

    Parameters
    ----------
    knots : tuple of float
        Strictly ascending.
    values : tuple of float
        Nondecreasing in ``[0, 1]`` and ending at 1.
    interpolation : {'linear', 'step'}
        Linear interpolation between knots, or a right-continuous step that
        holds each value until the next knot. Zero below the first knot.
    """

    knots: tuple[float, ...]
    values: tuple[float, ...]
    interpolation: str = "linear"

    def __post_init__(self):
        k = tuple(float(v) for v in self.knots)
        v = tuple(float(x) for x in self.values)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)
        if len(k) != len(v) or not k:
            raise DomainError("knots and values must be non-empty and of equal length")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise DomainError("knots must be strictly ascending")
        if any(b < a for a, b in zip(v, v[1:])) or v[0] < 0 or v[-1] != 1.0:
            raise DomainError("values must be nondecreasing in [0, 1] and end at 1")
        if self.interpolation not in ("linear", "step"):
            raise DomainError(f"interpolation must be 'linear' or 'step', got {self.interpolation!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        if self.interpolation == "linear":
            out = np.interp(x, k, v, left=0.0, right=1.0)
            out = np.where(x < k[0], 0.0, out)
        else:
            idx = np.searchsorted(k, x, side="right") - 1
            out = np.where(idx >= 0, v[np.clip(idx, 0, None)], 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class BlendedBase:
    """
    Posterior base ``(alpha H(x) + #{x_i <= x}) / (alpha + n)``.

    Keeps the original scenario curve, its weight and the pooled sorted
    sample, so repeated updates reproduce a single pooled update exactly.
    """

    prior_base: StepDistribution
    prior_weight: float
    samples: tuple[float, ...]

    @property
    def interpolation(self) -> str:
        return self.prior_base.interpolation

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        counts = np.searchsorted(np.asarray(self.samples), x, side="right")
        out = (self.prior_weight * np.asarray(self.prior_base(x)) + counts) / (
            self.prior_weight + len(self.samples)
        )
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class DirichletPrior:
    """``DP(concentration, base)``."""

    base: StepDistribution | BlendedBase
    concentration: float

    def __post_init__(self):
        if not self.concentration > 0:
            raise DomainError(f"concentration must be > 0, got {self.concentration}")

    def mean(self, x):
        return self.base(x)

    def marginal(self, x) -> BetaParams | float:
        """``Beta(alpha H(x), alpha (1 - H(x)))``, or ``H(x)`` itself when it is 0 or 1."""
        h = float(self.base(x))
        if h <= 0.0 or h >= 1.0:
            return h
        return BetaParams(self.concentration * h, self.concentration * (1.0 - h))


def dp_posterior(prior: DirichletPrior, samples) -> DirichletPrior:
    """
    Conjugate update with observed losses.

    >>> h = StepDistribution((0, 10, 30, 50, 120, 600), (0, .1, .5, .75, .9, 1))
    >>> post = dp_posterior(DirichletPrior(h, 10.0), [20, 30, 50, 80, 120, 170, 220, 280])
    >>> post.concentration, round(post.base(50.0), 6)
    (18.0, 0.583333)
    """
    new = np.asarray(samples, dtype=float).ravel()
    if new.size == 0:
        return prior
    if not np.all(np.isfinite(new)):
        raise DomainError("samples must be finite")
    base = prior.base
    if isinstance(base, BlendedBase):
        pooled = np.sort(np.concatenate([np.asarray(base.samples), new]))
        blended = BlendedBase(base.prior_base, base.prior_weight, tuple(pooled.tolist()))
    else:
        blended = BlendedBase(base, prior.concentration, tuple(np.sort(new).tolist()))
    # recomputed from the original weight so chained updates match a pooled one
    return DirichletPrior(blended, blended.prior_weight + len(blended.samples))


def dp_marginal_band(prior: DirichletPrior, x: float, lower_q: float, upper_q: float) -> tuple[float, float]:
    """
    Quantiles of the marginal law of ``F(x)``.

    Returns ``(H(x), H(x))`` when ``H(x)`` is 0 or 1, where the marginal is
    a point mass.
    """
    if not 0 < lower_q < upper_q < 1:
        raise DomainError("need 0 < lower_q < upper_q < 1")
    m = prior.marginal(x)
    if isinstance(m, float):
        return m, m
    return m.quantile(lower_q), m.quantile(upper_q)


def band_columns(prior: DirichletPrior, grid, lower_q: float = 0.1, upper_q: float = 0.9) -> np.ndarray:
    """Columns ``(x, lower, mean, upper)`` on a caller-supplied grid, for plotting."""
    grid = np.asarray(grid, dtype=float).ravel()
    out = np.empty((grid.size, 4))
    for i, x in enumerate(grid):
        lo, hi = dp_marginal_band(prior, x, lower_q, upper_q)
        out[i] = (x, lo, prior.mean(x), hi)
    return out
