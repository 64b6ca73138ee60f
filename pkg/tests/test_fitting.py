"""Estimation procedures validated against synthetic truths."""

import math

import numpy as np
import pytest

from mixlaw import (
    DegenerateWeightingError,
    DomainError,
    FitConfig,
    FitFailedError,
    InsufficientDataError,
    InvariantViolation,
    RankDeficientDataError,
    bootstrap_uncertainty,
    convergence_correct,
    eval_bivariate_law,
    eval_fraction_curve,
    eval_power_law,
    fit_bivariate_law,
    fit_fraction_curve,
    fit_joint_law,
    fit_power_law,
)
from mixlaw.fitting import coefficients_of

from conftest import SIZES_8, joint_points, power_points

TRUTH = dict(beta=100.0, alpha=0.3, l_inf=1.0)


class TestFitPowerLaw:
    def test_noiseless_recovery(self):
        points = power_points(**TRUTH, sizes=SIZES_8)
        params, diag = fit_power_law(points)
        assert params.beta == pytest.approx(TRUTH["beta"], rel=1e-4)
        assert params.alpha == pytest.approx(TRUTH["alpha"], rel=1e-4)
        assert params.l_inf == pytest.approx(TRUTH["l_inf"], rel=1e-4)
        assert diag.r_squared >= 1 - 1e-8
        assert diag.n_points == 8 and diag.n_params == 3

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            fit_power_law([(1e7, 2.0), (1e8, 1.5)])

    def test_duplicated_sizes_do_not_count(self):
        with pytest.raises(InsufficientDataError):
            fit_power_law([(1e7, 2.0), (1e7, 2.0), (1e8, 1.5)])

    def test_noisy_alpha_within_tolerance(self):
        points = power_points(**TRUTH, sizes=SIZES_8, noise=0.005, seed=31)
        params, _ = fit_power_law(points)
        assert params.alpha == pytest.approx(TRUTH["alpha"], rel=0.05)

    def test_deterministic(self):
        points = power_points(**TRUTH, sizes=SIZES_8, noise=0.01, seed=9)
        config = FitConfig(seed=77)
        first = fit_power_law(points, config=config)
        second = fit_power_law(points, config=config)
        assert first == second

    def test_log_shifted_space_recovers(self):
        points = power_points(**TRUTH, sizes=SIZES_8)
        params, _ = fit_power_law(points, config=FitConfig(residual_space="log_shifted"))
        assert params.alpha == pytest.approx(TRUTH["alpha"], rel=1e-3)

    def test_quality_direction_recovery(self):
        points = power_points(beta=400.0, alpha=0.25, l_inf=72.0, sizes=SIZES_8, direction="quality_like")
        params, diag = fit_power_law(points, direction="quality_like")
        assert params.beta == pytest.approx(400.0, rel=1e-3)
        assert params.alpha == pytest.approx(0.25, rel=1e-3)
        assert params.l_inf == pytest.approx(72.0, rel=1e-3)
        assert diag.r_squared >= 1 - 1e-8

    def test_nonpositive_loss_rejected(self):
        with pytest.raises(InvariantViolation):
            fit_power_law([(1e7, 2.0), (1e8, -1.5), (1e9, 1.0)])

    def test_positivity_constraints_hold(self):
        rng = np.random.default_rng(21)
        for seed in range(5):
            truth = dict(
                beta=float(rng.uniform(10, 300)),
                alpha=float(rng.uniform(0.1, 1.0)),
                l_inf=float(rng.uniform(0.1, 2.0)),
            )
            points = power_points(**truth, sizes=SIZES_8, noise=0.02, seed=seed)
            params, _ = fit_power_law(points)
            assert params.beta > 0 and params.alpha > 0 and params.l_inf >= 0

    def test_noiseless_in_range_truths_reach_unit_r_squared(self):
        # Oracle recovery: any in-range truth is recovered to R^2 >= 1 - 1e-8
        # on noiseless data.
        rng = np.random.default_rng(40)
        for _ in range(8):
            truth = dict(
                beta=float(rng.uniform(5, 800)),
                alpha=float(rng.uniform(0.08, 1.2)),
                l_inf=float(rng.uniform(0.0, 3.0)),
            )
            points = power_points(**truth, sizes=SIZES_8)
            _, diag = fit_power_law(points)
            assert diag.r_squared >= 1 - 1e-8


class TestFitBivariateLaw:
    truth = dict(beta=180.0, alpha_e=0.35, alpha_d=0.25, l_inf=0.8)

    @staticmethod
    def bivariate_points(beta, alpha_e, alpha_d, l_inf, grid):
        return [
            (ne, nd, beta * ne**-alpha_e * nd**-alpha_d + l_inf)
            for ne, nd in grid
        ]

    def test_noiseless_recovery(self):
        enc = np.geomspace(1e7, 5e8, 5)
        dec = np.geomspace(2e7, 8e8, 4)
        grid = [(float(ne), float(nd)) for ne in enc for nd in dec]
        points = self.bivariate_points(**self.truth, grid=grid)
        params, diag = fit_bivariate_law(points)
        assert params.beta == pytest.approx(self.truth["beta"], rel=1e-3)
        assert params.alpha_e == pytest.approx(self.truth["alpha_e"], rel=1e-3)
        assert params.alpha_d == pytest.approx(self.truth["alpha_d"], rel=1e-3)
        assert params.l_inf == pytest.approx(self.truth["l_inf"], rel=1e-3)
        assert diag.r_squared >= 1 - 1e-8

    def test_shared_encoder_size_rank_deficient(self):
        grid = [(1e8, float(nd)) for nd in np.geomspace(1e7, 1e9, 6)]
        points = self.bivariate_points(**self.truth, grid=grid)
        with pytest.raises(RankDeficientDataError):
            fit_bivariate_law(points)

    def test_too_few_points(self):
        grid = [(1e7, 1e7), (1e8, 1e8), (1e9, 1e9)]
        points = self.bivariate_points(**self.truth, grid=grid)
        with pytest.raises(InsufficientDataError):
            fit_bivariate_law(points)

    def test_diagonal_matches_univariate_reduction(self):
        # Proportionally scaled sizes collapse the law to a univariate one;
        # the oracle is a plain power-law fit on the same diagonal points.
        truth = dict(beta=150.0, alpha_e=0.3, alpha_d=0.3, l_inf=1.0)
        diag_sizes = np.geomspace(1e7, 1e9, 8)
        grid = [(float(m), float(m)) for m in diag_sizes]
        points = self.bivariate_points(**truth, grid=grid)
        fitted, _ = fit_bivariate_law(points)
        oracle, _ = fit_power_law([(m, y) for (m, _, y) in points])
        for m in np.geomspace(1e7, 1e9, 11):
            ours = eval_bivariate_law(fitted, float(m), float(m))
            ref = eval_power_law(oracle, float(m))
            assert ours == pytest.approx(ref, rel=1e-3)


class TestFitJointLaw:
    @staticmethod
    def shared_truth_betas(weightings, beta1=100.0, alpha=0.3):
        return {p: beta1 * p**-alpha for p in weightings}

    def test_noiseless_recovery_four_weightings(self):
        betas = self.shared_truth_betas((0.1, 0.3, 0.5, 1.0))
        points = joint_points(0.3, 1.0, betas, SIZES_8)
        law, diag = fit_joint_law(points)
        assert law.alpha == pytest.approx(0.3, rel=0.02)
        assert law.l_inf == pytest.approx(1.0, rel=0.02)
        for p, beta in betas.items():
            assert law.betas[p] == pytest.approx(beta, rel=0.03)
        assert diag.n_params == len(betas) + 2
        assert diag.r_squared >= 1 - 1e-8
        assert set(diag.per_weighting_r_squared) == set(betas)

    def test_single_weighting_rejected(self):
        points = joint_points(0.3, 1.0, {0.5: 120.0}, SIZES_8)
        with pytest.raises(InsufficientDataError):
            fit_joint_law(points)

    def test_degenerate_weighting_rejected(self):
        points = joint_points(0.3, 1.0, {1.0: 100.0}, SIZES_8)
        points.append((1e8, 0.5, 1.7))
        with pytest.raises(DegenerateWeightingError):
            fit_joint_law(points)

    def test_parameter_count_with_eight_weightings(self):
        # The production weighting grid has 8 non-zero entries, which makes
        # a 10-parameter fit: 8 betas plus shared alpha and l_inf.
        weightings = (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)
        points = joint_points(0.3, 1.0, self.shared_truth_betas(weightings), SIZES_8)
        law, diag = fit_joint_law(points)
        assert diag.n_params == 10
        assert len(law.betas) == 8

    def test_sse_nesting_against_per_weighting_fits(self):
        # The joint model is a constrained version of independent
        # per-weighting fits, so its SSE cannot be smaller.
        betas = self.shared_truth_betas((0.1, 0.5, 1.0))
        points = joint_points(0.3, 1.0, betas, SIZES_8, noise=0.01, seed=4)
        _, joint_diag = fit_joint_law(points)
        separate_sse = 0.0
        for p in betas:
            subset = [(n, y) for n, q, y in points if q == p]
            _, diag = fit_power_law(subset)
            separate_sse += diag.sse
        assert joint_diag.sse >= separate_sse - 1e-9

    def test_joint_beats_per_weighting_held_out(self):
        # Pooling weightings under a shared exponent reduces variance: on
        # held-out sizes the joint law predicts no worse than independent
        # per-weighting fits of the same data.
        betas = self.shared_truth_betas((0.1, 0.3, 0.5, 1.0))
        train_sizes = SIZES_8
        held_out = tuple(float(n) for n in np.geomspace(3e7, 8e8, 5))
        points = joint_points(0.3, 1.0, betas, train_sizes, noise=0.01, seed=31)
        law, _ = fit_joint_law(points)

        joint_err = 0.0
        separate_err = 0.0
        for p, beta in betas.items():
            subset = [(n, y) for n, q, y in points if q == p]
            single, _ = fit_power_law(subset)
            for n in held_out:
                true = beta * n**-0.3 + 1.0
                joint_err += (law.betas[p] * n**-law.alpha + law.l_inf - true) ** 2
                separate_err += (eval_power_law(single, n) - true) ** 2
        assert joint_err <= separate_err

    def test_zero_weight_point_rejected(self):
        points = joint_points(0.3, 1.0, {0.5: 120.0, 1.0: 100.0}, SIZES_8)
        points.append((1e8, 0.0, 5.0))
        with pytest.raises(Exception):
            fit_joint_law(points)

    def test_deterministic(self):
        betas = self.shared_truth_betas((0.5, 1.0))
        points = joint_points(0.3, 1.0, betas, SIZES_8, noise=0.02, seed=8)
        a = fit_joint_law(points, config=FitConfig(seed=5))
        b = fit_joint_law(points, config=FitConfig(seed=5))
        assert a == b


class TestFitFractionCurve:
    def test_identity_samples_give_zero_c1(self):
        samples = [(p, p) for p in (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)]
        fit, _ = fit_fraction_curve(samples, "flexible")
        assert abs(fit.c1) < 1e-3
        for p, _ in samples:
            assert eval_fraction_curve(fit, p) == pytest.approx(p, abs=1e-3)

    def test_linear_truth_recovered(self):
        truth_c1 = 0.8
        samples = [(p, truth_c1 * (p - 1.0) + 1.0) for p in (0.05, 0.3, 0.5, 0.9, 1.0)]
        fit, diag = fit_fraction_curve(samples, "linear")
        assert fit.c1 == pytest.approx(truth_c1, rel=1e-6)
        assert diag.sse == pytest.approx(0.0, abs=1e-24)

    def test_flexible_truth_curve_match_on_held_out_grid(self):
        truth = dict(c1=1.2, c2=0.7, c3=1.5)
        curve = lambda p: p + truth["c1"] * p ** truth["c2"] * (1 - p) ** truth["c3"]
        samples = [(p, curve(p)) for p in (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)]
        fit, _ = fit_fraction_curve(samples, "flexible")
        for p in np.linspace(0.07, 0.93, 25):
            assert eval_fraction_curve(fit, float(p)) == pytest.approx(curve(p), rel=0.01)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_fraction_curve([(0.5, 0.5), (0.7, 0.7), (1.0, 1.0)], "flexible")
        with pytest.raises(InsufficientDataError):
            fit_fraction_curve([(0.5, 0.5)], "linear")

    def test_all_baseline_samples_rejected(self):
        with pytest.raises(InsufficientDataError):
            fit_fraction_curve([(1.0, 1.0), (1.0, 1.0)], "linear")

    def test_constraints_hold(self):
        samples = [(p, 0.9 * p + 0.1) for p in (0.05, 0.2, 0.5, 0.8, 1.0)]
        fit, _ = fit_fraction_curve(samples, "flexible")
        assert fit.c2 > 0 and fit.c3 > 0


class TestConvergenceCorrect:
    def test_extrapolation_accuracy(self):
        steps = np.geomspace(1e3, 5e5, 20)
        curve = [(int(s), 3.0 * float(s) ** -0.2 + 1.5) for s in steps]
        result = convergence_correct(curve, 2_500_000)
        truth = 3.0 * 2_500_000**-0.2 + 1.5
        assert result.value == pytest.approx(truth, rel=0.005)
        assert result.extrapolation_flagged is False

    def test_target_at_last_step_returns_observed(self):
        steps = np.geomspace(1e3, 5e5, 12)
        curve = [(int(s), 3.0 * float(s) ** -0.2 + 1.5) for s in steps]
        result = convergence_correct(curve, int(steps[-1]))
        assert result.value == pytest.approx(curve[-1][1], rel=1e-4)

    def test_flat_curve_returns_constant(self):
        curve = [(int(s), 2.25) for s in np.geomspace(1e3, 1e5, 6)]
        result = convergence_correct(curve, 2_500_000)
        assert result.value == 2.25
        assert result.params is None
        assert result.diagnostics.converged

    def test_extrapolation_flag(self):
        steps = np.geomspace(1e3, 1e5, 10)
        curve = [(int(s), 3.0 * float(s) ** -0.2 + 1.5) for s in steps]
        assert convergence_correct(curve, 2_500_000).extrapolation_flagged is True
        assert convergence_correct(curve, 500_000).extrapolation_flagged is False

    def test_insufficient_span(self):
        curve = [(s, 2.0 + 1 / s) for s in (1000, 2000, 4000, 8000)]
        with pytest.raises(InsufficientDataError):
            convergence_correct(curve, 2_500_000)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            convergence_correct([(100, 3.0), (1000, 2.5), (10000, 2.2)], 2_500_000)

    def test_target_before_last_observation(self):
        curve = [(int(s), 3.0 * float(s) ** -0.2 + 1.5) for s in np.geomspace(1e3, 5e5, 8)]
        with pytest.raises(DomainError):
            convergence_correct(curve, 100_000)


class TestBootstrapUncertainty:
    points = power_points(**TRUTH, sizes=SIZES_8)

    def test_zero_sigma_gives_zero_stds(self):
        report = bootstrap_uncertainty(self.points, fit_power_law, sigma_fraction=0.0, replicates=8, seed=3)
        assert set(report.std_devs) == {"beta", "alpha", "l_inf"}
        assert all(std == 0.0 for std in report.std_devs.values())
        assert report.failed_count == 0

    def test_same_seed_identical_reports(self):
        a = bootstrap_uncertainty(self.points, fit_power_law, 0.01, replicates=12, seed=42)
        b = bootstrap_uncertainty(self.points, fit_power_law, 0.01, replicates=12, seed=42)
        assert a == b

    def test_different_seeds_differ(self):
        a = bootstrap_uncertainty(self.points, fit_power_law, 0.01, replicates=12, seed=1)
        b = bootstrap_uncertainty(self.points, fit_power_law, 0.01, replicates=12, seed=2)
        assert a != b

    def test_shared_alpha_estimates_within_two_stds(self):
        # Data generated from one shared exponent: per-weighting estimates
        # scatter, but stay within two reported standard deviations of each
        # other.
        betas = {p: 100.0 * p**-0.3 for p in (0.1, 0.3, 0.5, 1.0)}
        points = joint_points(0.3, 1.0, betas, SIZES_8, noise=0.005, seed=17)
        config = FitConfig(multistart_count=4)
        fitter = lambda pts: fit_power_law(pts, config=config)
        estimates = []
        for p in betas:
            subset = [(n, y) for n, q, y in points if q == p]
            params, _ = fitter(subset)
            report = bootstrap_uncertainty(subset, fitter, 0.01, replicates=32, seed=11)
            estimates.append((params.alpha, report.std_devs["alpha"]))
        for (a1, s1), (a2, s2) in zip(estimates, estimates[1:]):
            assert abs(a1 - a2) <= 2.0 * math.hypot(s1, s2)

    def test_failure_threshold(self):
        base_values = tuple(y for _, y in self.points)

        def brittle_fitter(pts):
            if tuple(y for _, y in pts) != base_values:
                raise InsufficientDataError("refusing perturbed data")
            return fit_power_law(pts)

        with pytest.raises(FitFailedError):
            bootstrap_uncertainty(self.points, brittle_fitter, 0.01, replicates=10, seed=0)

    def test_std_scales_roughly_linearly_with_sigma(self):
        fitter = lambda pts: fit_power_law(pts, config=FitConfig(multistart_count=4))
        lo = bootstrap_uncertainty(self.points, fitter, 0.005, replicates=24, seed=19)
        hi = bootstrap_uncertainty(self.points, fitter, 0.02, replicates=24, seed=19)
        ratio = hi.std_devs["alpha"] / lo.std_devs["alpha"]
        assert 2.0 <= ratio <= 8.0  # linear prediction is 4x, within a factor 2

    def test_replicate_floor(self):
        with pytest.raises(InsufficientDataError):
            bootstrap_uncertainty(self.points, fit_power_law, 0.01, replicates=1, seed=0)

    def test_joint_coefficient_names(self):
        betas = {0.5: 120.0, 1.0: 100.0}
        points = joint_points(0.3, 1.0, betas, SIZES_8)
        law, _ = fit_joint_law(points)
        names = set(coefficients_of(law))
        assert names == {"alpha", "l_inf", "beta@0.5", "beta@1"}
