"""
Closed-form scaling laws and effective capacity
===============================================

The core algebra, no fitting involved: evaluate single-size and joint laws,
derive the effective fraction of parameters a task receives inside a
multitask model, and predict performance at weightings that were never
trained.
"""

from mixlaw import (
    FractionFit,
    JointLaw,
    PowerLawParams,
    TaskId,
    effective_fraction,
    effective_params,
    eval_fraction_curve,
    eval_joint_loss,
    eval_power_law,
    neff_consistency_check,
    predict_loss_any_weighting,
)

# A single-task law: loss = beta * N^(-alpha) + l_inf.
single = PowerLawParams(beta=100.0, alpha=0.3, l_inf=1.0)
for n in (2e7, 1e8, 1e9):
    print(f"single-task loss at N={n:.0e}: {eval_power_law(single, n):.4f}")

# A joint law for one task observed at several training-mixture weightings.
# Only beta depends on the weight; alpha and l_inf are shared.
law = JointLaw(
    TaskId("en-de"),
    alpha=0.3,
    l_inf=1.0,
    betas={0.05: 100.0 * 0.22**-0.3, 0.5: 100.0 * 0.55**-0.3, 1.0: 100.0},
)
print("\njoint-law losses at N=1e9:")
for p in law.weightings:
    print(f"  weight {p:>5g}: loss {eval_joint_loss(law, p, 1e9):.4f}")

# The effective fraction f(p) = (beta_1 / beta_p)^(1/alpha) is independent
# of model size: a task trained at weight p performs like a dedicated model
# with f(p) * N parameters.
print("\neffective capacity at N=1e9:")
for p in law.weightings:
    f = effective_fraction(law, p)
    n_eff = effective_params(law, p, 1e9)
    print(f"  weight {p:>5g}: f={f:.3f}  N_eff={float(n_eff):.3e}  gain f/p={f / p:.2f}x")

# Both routes to the same number: the joint law directly, or the single-task
# law at the effective size. They agree to floating tolerance.
via_joint, via_neff = neff_consistency_check(law, 0.5, 1e9)
print(f"\nconsistency: {via_joint:.12f} (joint) vs {via_neff:.12f} (via N_eff)")

# A fitted fraction curve extends predictions to ANY weighting in (0, 1].
fraction = FractionFit(task=TaskId("en-de"), form="flexible", c1=0.3, c2=0.8, c3=1.2)
print("\npredictions at unseen weightings (N=1e9):")
for p in (0.15, 0.25, 0.6, 0.85):
    f_hat = eval_fraction_curve(fraction, p)
    loss = predict_loss_any_weighting(single, fraction, p, 1e9)
    print(f"  weight {p:>4g}: f_hat={f_hat:.3f}  predicted loss {loss:.4f}")
