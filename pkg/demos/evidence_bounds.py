"""
Interval evidence: Dempster-Shafer structures and p-boxes.

Two experts give interval estimates of a loss amount (in thousands) with
equal confidence in each. We combine them with Dempster's rule, read off
belief and plausibility, then build a Kolmogorov-Smirnov p-box around a
small internal sample and intersect it with the expert box.
"""
from fractions import Fraction

import numpy as np

from opcombine.evidence import (
    DempsterShaferStructure,
    belief,
    dempster_combine,
    ds_from_pbox,
    format_ds,
    ks_bounds,
    pbox_envelope,
    plausibility,
    plausibility_belief,
)

third = Fraction(1, 3)
a = DempsterShaferStructure.from_elements([((5, 20), third), ((10, 25), third), ((15, 30), third)])
b = DempsterShaferStructure.from_elements([((10, 25), third), ((15, 30), third), ((22, 35), third)])

combined, conflict = dempster_combine(a, b)
print(f"conflict between the experts: {conflict} ({float(conflict):.4f})")
print("combined structure (low high mass):")
print(format_ds(combined))

for query in [(0, 20), (0, 25), (15, 30)]:
    print(f"loss in {query}: belief {float(belief(combined, query)):.3f}, "
          f"plausibility {float(plausibility(combined, query)):.3f}")

# a distribution-free band from ten observed losses
sample = (3.5, 4, 6, 8.1, 9.2, 12.3, 14.8, 16.9, 18, 20)
ks = ks_bounds(sample, 0.2, support=(0, 40))
expert_box = plausibility_belief(combined)
print("\nx      KS lower/upper   expert lower/upper")
for x in (5, 10, 15, 20, 25, 30):
    print(f"{x:3d}    {ks.lower_at(x):.3f} {ks.upper_at(x):.3f}      "
          f"{expert_box.lower_at(x):.3f} {expert_box.upper_at(x):.3f}")

# the envelope keeps every distribution either source allows
env = pbox_envelope([ks, expert_box])
print(f"\nenvelope kind: {env.kind}; its 10-slice structure has "
      f"{len(ds_from_pbox(env, 10).masses)} focal elements")
print("widest envelope gap:", np.round(np.max(env.upper - env.lower), 3))
