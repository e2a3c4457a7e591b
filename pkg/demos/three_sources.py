"""
Blending external data, internal counts and expert opinion.

The gamma prior stands in for industry data. Internal counts arrive year
by year and three experts give point guesses of the rate. With experts the
posterior is a generalized inverse Gaussian; we print its mean next to the
two-source (prior plus counts) mean as the years accumulate. The same idea
is repeated for the lognormal severity location.
"""
import numpy as np

from opcombine.conjugate import LogLossSample, poisson_gamma_trajectory
from opcombine.distributions import GammaParams, NormalParams, gig_mean, make_rng
from opcombine.three_source import (
    ExpertIntensityOpinions,
    SeverityEvidence,
    estimate_xi,
    gig_prior,
    gig_update_step,
    lnn_posterior,
    lnn_weights,
)

external = GammaParams(3.407, 0.147)
opinions = (0.55, 0.7, 0.9)
xi = estimate_xi(opinions)
print(f"expert precision from their spread: xi = {xi:.2f}")
experts = ExpertIntensityOpinions(opinions, xi)

rng = make_rng(2024)
counts = rng.poisson(0.6, 15)

p = gig_prior(external, experts)
two_source = poisson_gamma_trajectory(external, counts)
print("\nyear  count  three-source  two-source")
for k, n in enumerate(counts):
    p = gig_update_step(p, int(n), 1.0)
    print(f"{k + 1:4d}  {n:5d}  {gig_mean(p):12.4f}  {two_source[k].mean():10.4f}")
print(f"posterior GIG: nu={p.nu:.3f} omega={p.omega:.3f} phi={p.phi:.3f}")

# severity: log-losses with known sigma, an industry prior and two experts
sigma = 2.0
y = rng.normal(10.5, sigma, 12)
ev = SeverityEvidence(NormalParams(10.0, 0.8), LogLossSample(tuple(y), sigma), (11.0, 10.7), xi=4.0)
w = lnn_weights(ev)
post = lnn_posterior(ev)
print(f"\nseverity weights: prior {w.prior:.3f}, internal {w.internal:.3f}, expert {w.expert:.3f}")
print(f"posterior mu: {post.mean:.3f} +/- {post.stdev:.3f} (sample mean of logs {np.mean(y):.3f})")
