"""
Combining internal data, external data and expert opinions in one model.

Frequency: the intensity has a gamma prior fitted to external data, annual
counts are Poisson with exposure scale ``V`` and each expert opinion is
``Gamma(xi, lambda / xi)`` given the intensity. The posterior is a
generalized inverse Gaussian.

Severity: the lognormal ``mu`` has a normal prior, log-losses are normal with
known ``sigma`` and expert opinions on ``mu`` are normal with standard
deviation ``xi``. The posterior is normal with three credibility weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .conjugate import LogLossSample, as_counts, lognormal_normal_posterior
from .distributions import GammaParams, GIGParams, NormalParams
from .errors import DomainError, EmptyDataError

__all__ = [
    "ExpertIntensityOpinions",
    "FrequencyEvidence",
    "CountedGIG",
    "SeverityEvidence",
    "SeverityWeights",
    "gig_posterior",
    "gig_update_step",
    "gig_prior",
    "estimate_xi",
    "lnn_posterior",
    "lnn_weights",
]


@dataclass(frozen=True)
class ExpertIntensityOpinions:
    """Expert intensity estimates sharing one precision ``xi``.

    ``xi`` is either supplied by the caller (e.g. fixed by a regulator) or
    estimated with :func:`estimate_xi`; ``xi_source`` records which.
    """

    opinions: tuple[float, ...]
    xi: float
    xi_source: str = "supplied"

    def __post_init__(self):
        object.__setattr__(self, "opinions", tuple(float(d) for d in self.opinions))
        if not self.opinions:
            raise DomainError("need at least one expert opinion")
        if any(not d > 0 for d in self.opinions):
            raise DomainError("expert opinions must be > 0")
        if not self.xi > 0:
            raise DomainError(f"xi must be > 0, got {self.xi}")

    @classmethod
    def with_estimated_xi(cls, opinions) -> "ExpertIntensityOpinions":
        return cls(tuple(opinions), estimate_xi(opinions), "estimated")


@dataclass(frozen=True)
class FrequencyEvidence:
    """External-data prior, internal annual counts and (optionally) experts."""

    prior: GammaParams
    counts: tuple[int, ...] = ()
    scale: float = 1.0
    experts: ExpertIntensityOpinions | None = None

    def __post_init__(self):
        object.__setattr__(self, "counts", as_counts(self.counts))
        if not self.scale > 0:
            raise DomainError(f"frequency scale V must be > 0, got {self.scale}")


@dataclass(frozen=True, eq=False)
class CountedGIG(GIGParams):
    """
    GIG posterior that remembers ``nu`` before any counts were added.

    ``nu`` is always ``base_nu + total_count`` rounded once, so the order
    in which years arrive cannot change it through intermediate rounding.
    Compares equal to a plain :class:`GIGParams` with the same parameters.
    """

    base_nu: float = field(default=0.0, repr=False)
    total_count: int = field(default=0, repr=False)

    def __eq__(self, other):
        if not isinstance(other, GIGParams):
            return NotImplemented
        return (self.nu, self.omega, self.phi) == (other.nu, other.omega, other.phi)

    def __hash__(self):
        return hash((self.nu, self.omega, self.phi))


def gig_update_step(p: GIGParams, n_next: int, scale: float) -> GIGParams:
    """Fold in one more year: ``nu += n``, ``omega += V``; ``phi`` is unchanged."""
    (n_next,) = as_counts([n_next])
    if not scale > 0:
        raise DomainError("frequency scale V must be > 0")
    if isinstance(p, CountedGIG):
        base, total = p.base_nu, p.total_count + n_next
    else:
        base, total = p.nu, n_next
    return CountedGIG(base + total, p.omega + scale, p.phi, base_nu=base, total_count=total)


def gig_prior(prior: GammaParams, experts: ExpertIntensityOpinions | None) -> GIGParams:
    """Posterior given experts only (no internal years)."""
    if experts is None:
        return GIGParams(prior.shape - 1.0, 1.0 / prior.scale, 0.0)
    m = len(experts.opinions)
    # sorted fsum keeps the result independent of opinion order
    total = math.fsum(sorted(experts.opinions))
    nu = prior.shape - 1.0 - m * experts.xi
    return GIGParams(nu, 1.0 / prior.scale, experts.xi * total)


def gig_posterior(ev: FrequencyEvidence) -> GIGParams:
    """
    Posterior of the intensity given all three sources.

    Parameters
    ----------
    ev : FrequencyEvidence

    Returns
    -------
    GIGParams
        ``nu = alpha0 - 1 - M xi + sum(n)``, ``omega = V T + 1/beta0``,
        ``phi = xi * sum(delta)``. Without experts ``phi = 0`` and the
        result is the conjugate gamma posterior in GIG form.

    Notes
    -----
    The years are folded in one at a time with :func:`gig_update_step`, so
    batch and recursive results coincide bit for bit.
    """
    p = gig_prior(ev.prior, ev.experts)
    for n in ev.counts:
        p = gig_update_step(p, n, ev.scale)
    return p


def estimate_xi(opinions) -> float:
    """
    Opinion precision from the spread of the experts: ``(mean / sd)^2``.

    The standard deviation uses the unbiased ``M - 1`` divisor; the implied
    coefficient of variation of a single opinion is ``1 / sqrt(xi)``.

    >>> round(estimate_xi([1, 1, 3]), 6)
    2.083333
    """
    d = np.asarray(opinions, dtype=float)
    if d.size < 2:
        raise EmptyDataError("estimating xi needs at least two expert opinions")
    sd = float(np.std(d, ddof=1))
    if sd == 0:
        raise DomainError("expert opinions are identical; xi is infinite")
    return (float(np.mean(d)) / sd) ** 2


@dataclass(frozen=True)
class SeverityEvidence:
    """Normal prior on ``mu``, internal log-losses and expert estimates of ``mu``."""

    prior: NormalParams
    log_losses: LogLossSample
    expert_mus: tuple[float, ...] = ()
    xi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "expert_mus", tuple(float(d) for d in self.expert_mus))
        if self.expert_mus and (self.xi is None or not self.xi > 0):
            raise DomainError("expert opinions on mu need a standard deviation xi > 0")


class SeverityWeights(NamedTuple):
    prior: float
    internal: float
    expert: float
    variance: float


def lnn_weights(ev: SeverityEvidence) -> SeverityWeights:
    """Credibility weights of prior, internal and expert information."""
    k = len(ev.log_losses.values)
    m = len(ev.expert_mus)
    prec0 = 1.0 / ev.prior.stdev ** 2
    prec_int = k / ev.log_losses.known_sigma ** 2
    prec_exp = m / ev.xi ** 2 if m else 0.0
    var = 1.0 / (prec0 + prec_int + prec_exp)
    return SeverityWeights(var * prec0, var * prec_int, var * prec_exp, var)


def lnn_posterior(ev: SeverityEvidence) -> NormalParams:
    """
    Normal posterior of ``mu`` from prior, log-losses and experts.

    The mean is ``w1 mu0 + w2 mean(ln x) + w3 mean(delta)`` with weights from
    :func:`lnn_weights`; these sum to one. Without experts this is the
    two-source lognormal-normal posterior and is delegated to it.
    """
    k = len(ev.log_losses.values)
    m = len(ev.expert_mus)
    if m == 0:
        return lognormal_normal_posterior(ev.prior, ev.log_losses)
    w = lnn_weights(ev)
    mu = w.prior * ev.prior.mean
    if k:
        mu += w.internal * math.fsum(sorted(ev.log_losses.values)) / k
    if m:
        mu += w.expert * math.fsum(sorted(ev.expert_mus)) / m
    return NormalParams(mu, math.sqrt(w.variance))
