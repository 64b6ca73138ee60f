"""
Fitting laws and checking them against a known truth
====================================================

The synthetic lab generates experiment records from a ground-truth law, so
every estimation path can be validated end to end: per-weighting power-law
fits, the joint shared-exponent fit, and fraction-curve fits.
"""

import numpy as np

from mixlaw import (
    FitConfig,
    GroundTruth,
    TaskTruth,
    WeightVector,
    build_fit_dataset,
    effective_fraction,
    fit_fraction_curve,
    fit_joint_law,
    fit_power_law,
    generate_dataset,
)

# Ground truth: shared alpha and l_inf, betas tabulated per weighting so
# that the effective fraction is exactly f(p) = p (neutral multitasking).
ALPHA, L_INF, BETA1 = 0.3, 1.0, 100.0
grid = (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)
truth = GroundTruth(
    tasks={
        "en-de": TaskTruth(alpha=ALPHA, l_inf=L_INF,
                           betas={p: BETA1 * p**-ALPHA for p in grid}),
        "en-zh": TaskTruth(alpha=0.32, l_inf=1.2,
                           betas={p: 120.0 * p**-0.32 for p in grid}),
    },
    multiplicative_sigma=0.003,  # 0.3% observation noise
    seed=7,
)

sizes = np.geomspace(2e7, 1e9, 8)
weightings = [WeightVector.pair("en-de", "en-zh", p) for p in (0.0, *grid)]
records = generate_dataset(truth, sizes, weightings)
print(f"generated {len(records)} synthetic runs")

points = build_fit_dataset(records, "en-de", "in_domain", "cross_entropy")

# Per-weighting fits: 3 parameters per weighting, fitted independently.
print("\nper-weighting fits (en-de):")
for p in grid[:4]:
    subset = [(n, y) for n, q, y in points if q == p]
    params, diag = fit_power_law(subset)
    print(f"  p={p:<5g} alpha={params.alpha:.4f}  l_inf={params.l_inf:.4f}  R2={diag.r_squared:.6f}")

# The joint fit shares alpha and l_inf across weightings: #weightings + 2
# parameters in total, instead of 3 per weighting.
law, diag = fit_joint_law(points, config=FitConfig(seed=1), task="en-de")
print(f"\njoint fit: alpha={law.alpha:.4f} (truth {ALPHA}),"
      f" l_inf={law.l_inf:.4f} (truth {L_INF}), {diag.n_params} parameters, R2={diag.r_squared:.6f}")

# Effective fractions from the joint law, and a parametric curve through them.
samples = [(p, effective_fraction(law, p)) for p in law.weightings]
flexible, _ = fit_fraction_curve(samples, "flexible", task="en-de")
linear, _ = fit_fraction_curve(samples, "linear", task="en-de")
print("\nfraction samples vs fitted curves:")
print(f"  flexible: c1={flexible.c1:.4f} c2={flexible.c2:.4f} c3={flexible.c3:.4f}")
print(f"  linear:   c1={linear.c1:.4f}  (identity would be c1=1)")
for p, f in samples:
    print(f"  p={p:<5g} f={f:.4f}")
