"""
Annual loss and capital for two risk cells.

Each cell has a gamma posterior on its event rate and a lognormal severity.
We simulate a million years, report the 0.999 quantile with its Monte Carlo
error, compare plug-in and predictive modes, and check how many losses
would be needed to pin the quantile down to 10%.
"""
import time

from opcombine.distributions import GammaParams, LognormalParams, NormalParams
from opcombine.lda import (
    LognormalPosterior,
    RiskCellModel,
    capital_report,
    data_sufficiency,
    single_loss_quantile_level,
)

cells = [
    RiskCellModel(GammaParams(19.4, 0.031), LognormalParams(9.0, 2.0), "fraud"),
    RiskCellModel(GammaParams(6.0, 0.4), LognormalPosterior(NormalParams(8.0, 0.3), 1.6), "systems"),
]

for mode in ("plugin", "predictive"):
    t0 = time.perf_counter()
    report, sim = capital_report(cells, 10 ** 6, seed=7, q=0.999, mode=mode, n_workers=4)
    print(f"--- {mode} ({time.perf_counter() - t0:.1f} s)")
    print(report.to_text())

report, _ = capital_report(cells, 10 ** 6, seed=7, aggregation="sum-of-vars", n_workers=4)
print(f"sum of per-cell quantiles: {report.var:,.0f}")

sev = LognormalParams(0.0, 2.0)
print(f"\nlosses needed for a 10% quantile at 0.999 under LN(0, 2): {data_sufficiency(0.999, 0.1, sev):,}")
print(f"single-loss level for q=0.999 with 10 events a year: {single_loss_quantile_level(0.999, 10)}")
