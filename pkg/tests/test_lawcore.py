"""Closed-form evaluation and algebra: exact cases, contract errors, and
randomized identities."""

import numpy as np
import pytest

from mixlaw import (
    BivariateLawParams,
    DomainError,
    FractionFit,
    InvariantViolation,
    JointLaw,
    MissingBaselineError,
    ModelSize,
    PowerLawParams,
    TaskId,
    UnknownWeightingError,
    WeightVector,
    ZeroShotError,
    effective_fraction,
    effective_params,
    eval_bivariate_law,
    eval_fraction_curve,
    eval_joint_loss,
    eval_power_law,
    eval_quality_law,
    neff_consistency_check,
    predict_loss_any_weighting,
)


def random_joint_law(rng) -> JointLaw:
    alpha = float(rng.uniform(0.05, 1.5))
    l_inf = float(rng.uniform(0.0, 3.0))
    betas = {1.0: float(rng.uniform(0.5, 500.0))}
    for p in rng.choice([0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95], size=3, replace=False):
        betas[float(p)] = float(rng.uniform(0.5, 500.0))
    return JointLaw("task", alpha=alpha, l_inf=l_inf, betas=betas)


class TestEvalPowerLaw:
    def test_exact_arithmetic(self):
        params = PowerLawParams(beta=100, alpha=0.5, l_inf=1.0)
        assert eval_power_law(params, 1e4) == 2.0

    def test_asymptote(self):
        params = PowerLawParams(beta=100, alpha=0.5, l_inf=1.0)
        assert eval_power_law(params, 1e30) == pytest.approx(1.0, abs=1e-10)

    def test_derived_value(self):
        # Independent high-precision evaluation of 500 * (1e6)**-0.25 + 0.8.
        params = PowerLawParams(beta=500, alpha=0.25, l_inf=0.8)
        assert eval_power_law(params, 1e6) == pytest.approx(16.61138830084190, rel=1e-12)

    def test_monotone_decreasing_to_l_inf(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            params = PowerLawParams(
                beta=float(rng.uniform(0.5, 500)),
                alpha=float(rng.uniform(0.05, 1.5)),
                l_inf=float(rng.uniform(0, 3)),
            )
            sizes = np.geomspace(1e6, 1e12, 13)
            values = [eval_power_law(params, n) for n in sizes]
            assert all(a > b for a, b in zip(values, values[1:]))
            assert all(v > params.l_inf for v in values)

    def test_quality_form_increases(self):
        params = PowerLawParams(beta=50, alpha=0.3, l_inf=70.0)
        low, high = eval_quality_law(params, 1e6), eval_quality_law(params, 1e9)
        assert low < high < 70.0

    def test_accepts_model_size(self):
        params = PowerLawParams(beta=100, alpha=0.5, l_inf=1.0)
        assert eval_power_law(params, ModelSize(1e4)) == 2.0

    def test_invariants_rejected(self):
        with pytest.raises(InvariantViolation):
            PowerLawParams(beta=0.0, alpha=0.5, l_inf=1.0)
        with pytest.raises(InvariantViolation):
            PowerLawParams(beta=1.0, alpha=0.0, l_inf=1.0)
        with pytest.raises(InvariantViolation):
            PowerLawParams(beta=1.0, alpha=0.5, l_inf=-0.1)
        with pytest.raises(InvariantViolation):
            ModelSize(0.0)


class TestEvalBivariateLaw:
    def test_exact_arithmetic(self):
        params = BivariateLawParams(beta=100, alpha_e=0.25, alpha_d=0.25, l_inf=1.0)
        assert eval_bivariate_law(params, 1e4, 1e4) == 2.0

    def test_unit_decoder(self):
        params = BivariateLawParams(beta=100, alpha_e=0.5, alpha_d=0.5, l_inf=0.0)
        assert eval_bivariate_law(params, 1e4, 1) == 1.0

    def test_derived_value(self):
        # Independent evaluation of 250 * (2e8)**-0.3 * (3e8)**-0.2 + 0.5.
        params = BivariateLawParams(beta=250, alpha_e=0.3, alpha_d=0.2, l_inf=0.5)
        assert eval_bivariate_law(params, 2e8, 3e8) == pytest.approx(0.5163007189298624, rel=1e-12)

    def test_zero_exponent_rejected(self):
        with pytest.raises(InvariantViolation):
            BivariateLawParams(beta=100, alpha_e=0.5, alpha_d=0.0, l_inf=0.0)


class TestEvalJointLoss:
    def test_p1_exact(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0})
        assert eval_joint_loss(law, 1.0, 4) == 2.0

    def test_unknown_weighting(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0})
        with pytest.raises(UnknownWeightingError):
            eval_joint_loss(law, 0.3, 4)

    def test_half_weight_exact(self):
        law = JointLaw("t", alpha=1.5, l_inf=0.25, betas={0.5: 8.0})
        assert eval_joint_loss(law, 0.5, 4) == 1.25

    def test_key_rounding_survives_float_noise(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={0.3: 5.0})
        assert eval_joint_loss(law, 1 - 0.7, 1e6) == eval_joint_loss(law, 0.3, 1e6)

    def test_quality_direction(self):
        law = JointLaw("t", alpha=0.5, l_inf=70.0, betas={1.0: 100.0}, metric_direction="quality_like")
        assert eval_joint_loss(law, 1.0, 1e4) == 69.0

    def test_zero_weight_key_rejected(self):
        with pytest.raises(InvariantViolation):
            JointLaw("t", alpha=0.5, l_inf=1.0, betas={0.0: 2.0})


class TestEffectiveFraction:
    def test_closed_form_exact(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0, 0.5: 4.0})
        assert effective_fraction(law, 0.5) == 0.25

    def test_identity_at_p1(self):
        law = JointLaw("t", alpha=0.7, l_inf=1.0, betas={1.0: 3.0, 0.5: 3.0})
        assert effective_fraction(law, 1.0) == 1.0
        assert effective_fraction(law, 0.5) == 1.0

    def test_cube_root_case(self):
        law = JointLaw("t", alpha=1.5, l_inf=0.0, betas={1.0: 1.0, 0.3: 8.0})
        assert effective_fraction(law, 0.3) == 0.25

    def test_missing_baseline(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={0.5: 4.0})
        with pytest.raises(MissingBaselineError):
            effective_fraction(law, 0.5)

    def test_unknown_weighting(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0})
        with pytest.raises(UnknownWeightingError):
            effective_fraction(law, 0.7)

    def test_synergy_not_clamped(self):
        # A smaller beta at p < 1 than at p = 1 means f > 1.
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 4.0, 0.5: 2.0})
        assert effective_fraction(law, 0.5) == 4.0


class TestEffectiveParams:
    def test_quarter_fraction(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0, 0.5: 4.0})
        assert float(effective_params(law, 0.5, 1e8)) == 2.5e7

    def test_identity_at_p1(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0})
        assert float(effective_params(law, 1.0, 123456789.0)) == 123456789.0

    def test_derived_value(self):
        # Independent evaluation of (3/5)**(1/0.3) * 1e9.
        law = JointLaw("t", alpha=0.3, l_inf=0.0, betas={1.0: 3.0, 0.5: 5.0})
        assert float(effective_params(law, 0.5, 1e9)) == pytest.approx(182181455.7051778, rel=1e-9)

    def test_scale_independence(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            law = random_joint_law(rng)
            p = list(law.betas)[0]
            n = float(rng.uniform(1e6, 1e10))
            assert float(effective_params(law, p, 2 * n)) == 2.0 * float(effective_params(law, p, n))


class TestFractionCurve:
    def test_flexible_midpoint(self):
        fit = FractionFit(task=TaskId("t"), form="flexible", c1=1.0, c2=1.0, c3=1.0)
        assert eval_fraction_curve(fit, 0.5) == 0.75

    def test_boundary_identity_both_forms(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            flexible = FractionFit(
                task=TaskId("t"),
                form="flexible",
                c1=float(rng.uniform(-3, 3)),
                c2=float(rng.uniform(0.01, 5)),
                c3=float(rng.uniform(0.01, 5)),
            )
            linear = FractionFit(task=TaskId("t"), form="linear", c1=float(rng.uniform(-3, 3)))
            assert eval_fraction_curve(flexible, 1.0) == 1.0
            assert eval_fraction_curve(linear, 1.0) == 1.0

    def test_linear_midpoint(self):
        fit = FractionFit(task=TaskId("t"), form="linear", c1=0.5)
        assert eval_fraction_curve(fit, 0.5) == 0.75

    def test_domain_errors(self):
        fit = FractionFit(task=TaskId("t"), form="linear", c1=0.5)
        with pytest.raises(DomainError):
            eval_fraction_curve(fit, -0.01)
        with pytest.raises(DomainError):
            eval_fraction_curve(fit, 1.01)

    def test_form_invariants(self):
        with pytest.raises(InvariantViolation):
            FractionFit(task=TaskId("t"), form="flexible", c1=1.0, c2=None, c3=1.0)
        with pytest.raises(InvariantViolation):
            FractionFit(task=TaskId("t"), form="flexible", c1=1.0, c2=-1.0, c3=1.0)
        with pytest.raises(InvariantViolation):
            FractionFit(task=TaskId("t"), form="linear", c1=1.0, c2=2.0)


class TestPredictAnyWeighting:
    single = PowerLawParams(beta=100, alpha=0.5, l_inf=1.0)

    def test_p1_matches_single_task_exactly(self):
        fit = FractionFit(task=TaskId("t"), form="linear", c1=0.8)
        for n in (1e4, 3.7e8, 1e9):
            assert predict_loss_any_weighting(self.single, fit, 1.0, n) == eval_power_law(
                self.single, n
            )

    def test_quarter_fraction_value(self):
        # Linear curve with c1 = 1.5 passes through f(0.5) = 0.25.
        fit = FractionFit(task=TaskId("t"), form="linear", c1=1.5)
        assert predict_loss_any_weighting(self.single, fit, 0.5, 1e4) == 3.0

    def test_zero_shot_rejected(self):
        fit = FractionFit(task=TaskId("t"), form="linear", c1=0.8)
        with pytest.raises(ZeroShotError):
            predict_loss_any_weighting(self.single, fit, 0.0, 1e8)

    def test_out_of_range_rejected(self):
        fit = FractionFit(task=TaskId("t"), form="linear", c1=0.8)
        with pytest.raises(DomainError):
            predict_loss_any_weighting(self.single, fit, 1.2, 1e8)

    def test_identity_curve_reduces_to_scaled_size(self):
        # Neutral multitasking: f = p makes the prediction equal the
        # single-task law at p * n.
        fit = FractionFit(task=TaskId("t"), form="linear", c1=1.0)
        rng = np.random.default_rng(5)
        for _ in range(50):
            p = float(rng.uniform(0.05, 1.0))
            n = float(rng.uniform(1e6, 1e10))
            expected = eval_power_law(self.single, (fit.c1 * (p - 1.0) + 1.0) * n)
            assert predict_loss_any_weighting(self.single, fit, p, n) == pytest.approx(
                expected, rel=1e-12
            )


class TestNeffConsistency:
    def test_identity_holds_randomized(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(1000):
            law = random_joint_law(rng)
            p = float(rng.choice(list(law.betas)))
            n = float(rng.uniform(1e6, 1e10))
            via_joint, via_neff = neff_consistency_check(law, p, n)
            worst = max(worst, abs(via_joint - via_neff) / abs(via_joint))
        assert worst < 1e-10

    def test_p1_case(self):
        law = JointLaw("t", alpha=0.5, l_inf=1.0, betas={1.0: 2.0, 0.5: 4.0})
        via_joint, via_neff = neff_consistency_check(law, 1.0, 1e8)
        assert via_joint == via_neff == eval_joint_loss(law, 1.0, 1e8)


class TestWeightVector:
    def test_pair(self):
        vec = WeightVector.pair("a", "b", 0.3)
        assert vec.weight("a") == 0.3
        assert vec.weight("b") == 0.7

    def test_sum_enforced(self):
        with pytest.raises(InvariantViolation):
            WeightVector({"a": 0.5, "b": 0.48})

    def test_negative_rejected(self):
        with pytest.raises(InvariantViolation):
            WeightVector({"a": 1.2, "b": -0.2})

    def test_empty_rejected(self):
        with pytest.raises(InvariantViolation):
            WeightVector({})

    def test_zero_weight_allowed(self):
        vec = WeightVector({"a": 1.0, "b": 0.0})
        assert vec.weight("b") == 0.0
        assert vec.weight("missing") == 0.0


class TestTaskId:
    def test_direction_tag_ignored_in_equality(self):
        assert TaskId("en-de") == TaskId("en-de", direction="En->XX")
        assert hash(TaskId("en-de")) == hash(TaskId("en-de", direction="En->XX"))

    def test_empty_name_rejected(self):
        with pytest.raises(InvariantViolation):
            TaskId("")

    def test_quality_like_allows_free_asymptote(self):
        law = JointLaw(
            "t", alpha=0.5, l_inf=-0.25, betas={1.0: 2.0}, metric_direction="quality_like"
        )
        assert law.l_inf == -0.25
        with pytest.raises(InvariantViolation):
            JointLaw("t", alpha=0.5, l_inf=-0.25, betas={1.0: 2.0})
