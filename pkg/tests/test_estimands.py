import numpy as np
import pytest

from survmix import (CensoringSpec, EstimatedCurves, MixtureArm, TrialConfig,
                     TwoArmTruth, censoring_sensitivity, cumulative_hazard,
                     landmark_contrast, log_survival_ratio, marginal_survival,
                     rmst, simulate)

# frozen from a 50-digit evaluation of the closed forms (two_point_truth)
LANDMARK_DIFF_AT_1 = 0.10933106491176293
LOG_SURVIVAL_RATIO_AT_1 = 0.5176429267838916
LOG_SURVIVAL_RATIO_AT_200 = 0.5167482300906631
RMST_CONTROL_AT_10 = 4.153864847143703
RMST_RESEARCH_AT_10 = 5.770523405625868
RMST_SINGLE_EXP_01_AT_10 = 6.321205588285577


def small_estimated_source():
    # two arms of four subjects each, hand-checkable Kaplan-Meier curves
    time = np.array([1.0, 2.0, 3.0, 4.0, 0.5, 2.5, 3.5, 5.0])
    event = np.array([1, 0, 1, 0, 1, 1, 0, 1], dtype=bool)
    arm = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    return EstimatedCurves.from_sample(time, event, arm)


class TestLandmarkContrast:
    def test_truth_difference(self, two_point_truth):
        report = landmark_contrast(two_point_truth, 1.0, kind="difference")
        assert report.value == pytest.approx(LANDMARK_DIFF_AT_1, abs=1e-14)
        assert report.per_arm["control"] == pytest.approx(0.7556840388742965, abs=1e-14)
        assert report.per_arm["research"] == pytest.approx(0.8650151037860594, abs=1e-14)
        assert report.source == "truth"

    def test_identical_arms_ratio_is_one(self, two_point_truth):
        same = TwoArmTruth(two_point_truth.control, two_point_truth.control)
        for t in (0.5, 3.0, 12.0):
            assert landmark_contrast(same, t, kind="ratio").value == pytest.approx(
                1.0, abs=1e-14)

    @pytest.mark.parametrize("t_star", [0.25, 1.0, 7.5])
    def test_risk_difference_is_negated_difference(self, two_point_truth, t_star):
        diff = landmark_contrast(two_point_truth, t_star, kind="difference").value
        risk = landmark_contrast(two_point_truth, t_star, kind="risk_difference").value
        assert risk == -diff

    def test_estimated_source_uses_km_steps(self):
        source = small_estimated_source()
        report = landmark_contrast(source, 2.75, kind="difference")
        assert report.per_arm["control"] == pytest.approx(0.75, abs=1e-15)
        assert report.per_arm["research"] == pytest.approx(0.5, abs=1e-15)
        assert report.source == "estimated"

    def test_beyond_support_names_maximum(self):
        source = small_estimated_source()
        with pytest.raises(ValueError, match="maximum supported landmark is 4"):
            landmark_contrast(source, 4.5)

    def test_rejects_nonpositive_landmark(self, two_point_truth):
        with pytest.raises(ValueError, match="> 0"):
            landmark_contrast(two_point_truth, 0.0)

    def test_rejects_unknown_kind(self, two_point_truth):
        with pytest.raises(ValueError, match="kind"):
            landmark_contrast(two_point_truth, 1.0, kind="odds")


class TestRmst:
    def test_single_exponential_closed_form(self):
        arm = MixtureArm(weights=(1.0,), rates=(0.1,))
        truth = TwoArmTruth(control=arm, research=arm)
        report = rmst(truth, "control", 10.0)
        assert report.value == pytest.approx(RMST_SINGLE_EXP_01_AT_10, abs=1e-12)

    def test_mixture_closed_form_matches_quadrature(self, two_point_truth):
        for label, arm, frozen in (
            ("control", two_point_truth.control, RMST_CONTROL_AT_10),
            ("research", two_point_truth.research, RMST_RESEARCH_AT_10),
        ):
            report = rmst(two_point_truth, label, 10.0)
            assert report.value == pytest.approx(frozen, abs=1e-12)
            t = np.linspace(0.0, 10.0, 100_001)
            quad = np.trapezoid(marginal_survival(arm, t), t)
            assert report.value == pytest.approx(quad, abs=1e-6)

    def test_difference_is_research_minus_control(self, two_point_truth):
        report = rmst(two_point_truth, "difference", 10.0)
        assert report.value == pytest.approx(
            RMST_RESEARCH_AT_10 - RMST_CONTROL_AT_10, abs=1e-12)
        assert set(report.per_arm) == {"control", "research"}

    def test_short_horizon_approaches_horizon(self, two_point_truth):
        tau = 1e-6
        value = rmst(two_point_truth, "control", tau).value
        assert 0.0 < value <= tau
        assert value == pytest.approx(tau, rel=1e-5)

    def test_estimated_source_exact_step_area(self):
        source = small_estimated_source()
        # control KM: 1 on [0,1), 0.75 on [1,3), 0.375 on [3,4]
        value = rmst(source, "control", 4.0).value
        assert value == pytest.approx(1.0 + 0.75 * 2 + 0.375 * 1, abs=1e-12)

    def test_estimated_horizon_beyond_support_rejected(self):
        source = small_estimated_source()
        with pytest.raises(ValueError, match="last observed time"):
            rmst(source, "control", 4.5)
        rmst(source, "research", 4.5)  # research arm extends to 5.0

    def test_value_within_bounds(self, two_point_truth):
        report = rmst(two_point_truth, "control", 30.0)
        assert 0.0 < report.value <= 30.0

    def test_bad_arguments(self, two_point_truth):
        with pytest.raises(ValueError, match="> 0"):
            rmst(two_point_truth, "control", 0.0)
        with pytest.raises(ValueError, match="arm"):
            rmst(two_point_truth, "treatment", 1.0)


class TestLogSurvivalRatio:
    def test_proportional_hazards_gives_constant_rate_ratio(self, single_rate_truth):
        for t in (0.1, 1.0, 10.0, 100.0):
            report = log_survival_ratio(single_rate_truth, t)
            assert abs(report.value - 0.5) < 1e-12

    def test_mixture_value(self, two_point_truth):
        report = log_survival_ratio(two_point_truth, 1.0)
        assert report.value == pytest.approx(LOG_SURVIVAL_RATIO_AT_1, abs=1e-13)

    def test_late_time_approaches_stratum_ratio(self, two_point_truth):
        report = log_survival_ratio(two_point_truth, 200.0)
        assert report.value == pytest.approx(LOG_SURVIVAL_RATIO_AT_200, abs=1e-12)
        assert abs(report.value - 0.5) < abs(LOG_SURVIVAL_RATIO_AT_1 - 0.5)

    def test_equals_cumulative_hazard_ratio(self, two_point_truth):
        # same quantity through an independent code path
        for t in np.linspace(0.05, 60.0, 240):
            ratio = (cumulative_hazard(two_point_truth.research, t)
                     / cumulative_hazard(two_point_truth.control, t))
            assert log_survival_ratio(two_point_truth, t).value == pytest.approx(
                ratio, abs=1e-12)

    def test_stays_in_half_open_band(self, two_point_truth):
        for t in np.linspace(0.01, 100.0, 500):
            value = log_survival_ratio(two_point_truth, t).value
            assert 0.5 - 1e-12 <= value < 1.0

    def test_undefined_at_zero_or_degenerate(self, two_point_truth):
        with pytest.raises(ValueError, match="> 0"):
            log_survival_ratio(two_point_truth, 0.0)
        source = small_estimated_source()
        with pytest.raises(ValueError, match="undefined"):
            log_survival_ratio(source, 0.4)  # before the first event: S = 1


class TestCensoringSensitivity:
    def test_smoke_two_replicates(self, two_point_truth):
        config = TrialConfig(truth=two_point_truth, n_per_arm=100, seed=55)
        rows = censoring_sensitivity(config, [CensoringSpec("none")], replicates=2)
        assert len(rows) == 1
        assert rows[0].n_ok == 2 and rows[0].n_failed == 0
        assert np.isfinite(rows[0].mean_beta) and np.isfinite(rows[0].mc_se)

    def test_replicates_must_be_at_least_two(self, two_point_truth):
        config = TrialConfig(truth=two_point_truth, n_per_arm=100, seed=55)
        with pytest.raises(ValueError, match="replicates"):
            censoring_sensitivity(config, [CensoringSpec("none")], replicates=1)

    def test_proportional_hazards_insensitive(self, single_rate_truth):
        config = TrialConfig(truth=single_rate_truth, n_per_arm=500, seed=61)
        early = CensoringSpec("administrative", admin_time=2.0)
        late = CensoringSpec("administrative", admin_time=30.0)
        r_early, r_late = censoring_sensitivity(config, [early, late], replicates=60)
        combined = np.hypot(r_early.mc_se, r_late.mc_se)
        assert abs(r_early.mean_beta - r_late.mean_beta) < 3 * combined
        for row in (r_early, r_late):
            assert abs(row.mean_beta - np.log(0.5)) < 3 * row.mc_se

    def test_frailty_makes_average_depend_on_censoring(self, two_point_truth):
        config = TrialConfig(truth=two_point_truth, n_per_arm=500, seed=61)
        early = CensoringSpec("administrative", admin_time=2.0)
        late = CensoringSpec("administrative", admin_time=30.0)
        r_early, r_late = censoring_sensitivity(config, [early, late], replicates=60)
        combined = np.hypot(r_early.mc_se, r_late.mc_se)
        assert abs(r_early.mean_beta - r_late.mean_beta) > 4 * combined
        assert abs(r_early.mean_beta - np.log(0.5)) < abs(r_late.mean_beta - np.log(0.5))

    def test_failed_replicates_counted_not_fatal(self, two_point_truth):
        # admissions this early leave (almost) no events, so fits fail
        config = TrialConfig(truth=two_point_truth, n_per_arm=3, seed=71)
        spec = CensoringSpec("administrative", admin_time=1e-6)
        rows = censoring_sensitivity(config, [spec], replicates=5)
        assert rows[0].n_ok + rows[0].n_failed == 5
        assert rows[0].n_failed > 0

    def test_deterministic_given_seed(self, two_point_truth):
        config = TrialConfig(truth=two_point_truth, n_per_arm=200, seed=81)
        spec = CensoringSpec("exponential", rate=0.2)
        first = censoring_sensitivity(config, [spec], replicates=10)
        second = censoring_sensitivity(config, [spec], replicates=10)
        assert first == second
