"""Desk-scale look at the corrected price's convergence rate.

The first-order corrected price is accurate to o(sqrt(eps)): halving eps
four times, the scaled error |MC - q_eps| / sqrt(eps) must keep falling,
and the corrected price must beat the plain constant-volatility price at
every eps.  The full-budget run (2e5 paths) lives in the acceptance tests;
this demo uses a tenth of that to stay interactive (~30 s).
"""

from roughvol import BoundedSigmoid, ModelParams, convergence_study, smooth_ramp

mp = ModelParams(hurst=0.3, eps=0.1, rho=-0.5,
                 vol_fn=BoundedSigmoid(0.05, 0.85, 3.5),
                 x0=1.0, maturity_T=1.0)
payoff = smooth_ramp(1.0, 0.1)   # smooth bounded ramp centred at the money

report = convergence_study(mp, (0.1, 0.05, 0.025, 0.0125), payoff,
                           n_paths=20_000, seed=2024,
                           points_per_eps=4, warmup_mult=24.0)
print(report.to_text())

print("scaled errors should fall down the rows; error_bs is the")
print("uncorrected constant-volatility benchmark (always worse).")
for name, slope in report.rate_fits:
    print(f"{name}: {slope:.3f}")
