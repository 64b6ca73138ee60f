"""
Coefficient uncertainty and convergence correction
==================================================

Two supporting procedures around the fits: a seeded parametric bootstrap
that turns observation noise into per-coefficient standard deviations, and
a step-curve extrapolation that estimates where an under-trained run would
have landed at a large step budget.
"""

import numpy as np

from mixlaw import (
    FitConfig,
    bootstrap_uncertainty,
    convergence_correct,
    fit_power_law,
    generate_training_curve,
)

# --- Bootstrap -------------------------------------------------------------
ALPHA, L_INF, BETA = 0.3, 1.0, 100.0
sizes = np.geomspace(2e7, 1e9, 8)
rng = np.random.default_rng(3)
points = []
for n in sizes:
    y = BETA * float(n) ** -ALPHA + L_INF
    points.append((float(n), y * (1.0 + 0.005 * rng.standard_normal())))

config = FitConfig(multistart_count=8)
fitter = lambda pts: fit_power_law(pts, config=config)
params, _ = fitter(points)
report = bootstrap_uncertainty(points, fitter, sigma_fraction=0.01, replicates=48, seed=0)
print("power-law fit with bootstrap uncertainty (sigma = 1% of each value):")
for name, value in (("beta", params.beta), ("alpha", params.alpha), ("l_inf", params.l_inf)):
    print(f"  {name:<6} = {value:9.4f} +/- {report.std_devs[name]:.4f}")
print(f"  ({report.replicate_count} replicates, {report.failed_count} failures)")

# Same seed means bit-identical reports; uncertainty is reproducible.
again = bootstrap_uncertainty(points, fitter, sigma_fraction=0.01, replicates=48, seed=0)
print(f"  reproducible given seed: {report == again}")

# --- Convergence correction --------------------------------------------------
# A low-weight task in a large model is still descending at the end of
# training. Extrapolate its step curve to the convergence horizon instead
# of using the last (too pessimistic) observation.
target = 2_500_000
final_value = 1.62
curve = generate_training_curve(final_value, (0.23, 5.0), np.geomspace(2e3, 5e5, 18), seed=1)
result = convergence_correct(curve, target)
print(f"\nlast observed value:    {curve[-1][1]:.4f}")
print(f"corrected at {target:,} steps: {result.value:.4f} (truth {final_value})")
print(f"flagged as aggressive extrapolation: {result.extrapolation_flagged}")
