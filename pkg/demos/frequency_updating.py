"""
Frequency updating for one risk cell.

An expert says the annual event rate is about 0.5 and lies in [0.25, 0.75]
with two-in-three confidence. We turn that into a gamma prior, then watch
the posterior mean move as 25 years of counts arrive, next to the plain
running average.
"""
import numpy as np

from opcombine.conjugate import (
    ElicitedInterval,
    credibility_decomposition,
    fit_gamma_prior_from_interval,
    mle_trajectory,
    poisson_gamma_trajectory,
    poisson_predictive,
)

counts = (0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 2, 1, 1, 2, 0, 2, 0, 1, 0, 0, 1, 0, 1, 1, 0)

prior = fit_gamma_prior_from_interval(ElicitedInterval(0.5, 0.25, 0.75, 2 / 3))
print(f"prior: shape {prior.shape:.3f}, scale {prior.scale:.3f}, mean {prior.mean():.3f}")

traj = poisson_gamma_trajectory(prior, counts)
mle = mle_trajectory(counts)
print("\nyear  count  bayes   +/-    mle")
for k, (p, m) in enumerate(zip(traj, mle), start=1):
    print(f"{k:4d}  {counts[k - 1]:5d}  {p.mean():.3f}  {p.std():.3f}  {m:.3f}")

bayes = np.array([p.mean() for p in traj])
print(f"\nlargest year-over-year move: bayes {np.abs(np.diff(bayes)).max():.3f}, "
      f"mle {np.abs(np.diff(mle)).max():.3f}")

# how much weight the data carries after all 25 years
cd = credibility_decomposition(prior, counts)
print(f"credibility weight on the data: {cd.weight:.3f}")

nb = poisson_predictive(traj[-1])
print("next-year count probabilities:", np.round(nb.pmf(np.arange(5)), 4))
