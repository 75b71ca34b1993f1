import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdsflow.demand import (
    EntitlementPolicy,
    LineFit,
    UndernourishmentModel,
    baseline_undernourished,
    dynamic_undernourished,
    fit_undernourishment_line,
    intercept_for_slope,
    scale_demand_to_state,
    weekly_demand,
)
from pdsflow.domain import CardholderEstimate, Stage
from pdsflow.errors import DegenerateDesign, DegenerateRatio, ZeroAggregate


def est(aay, pri):
    return CardholderEstimate(0, aay, pri, Stage.CAPPED)


class TestWeeklyDemand:
    def test_aay_only(self):
        # 1000 households x 35 kg/month x 12/52
        assert weekly_demand(est(1000, 0)) == pytest.approx(8076.923, rel=1e-6)

    def test_priority_only(self):
        assert weekly_demand(est(0, 2000)) == pytest.approx(2307.692, rel=1e-6)

    def test_zero(self):
        assert weekly_demand(est(0, 0)) == 0.0

    @given(
        a1=st.floats(0, 1e5), a2=st.floats(0, 1e5),
        p1=st.floats(0, 1e7), p2=st.floats(0, 1e7),
    )
    @settings(max_examples=50)
    def test_linear_in_counts(self, a1, a2, p1, p2):
        lhs = weekly_demand(est(a1 + a2, p1 + p2))
        rhs = weekly_demand(est(a1, p1)) + weekly_demand(est(a2, p2))
        assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-9)

    def test_policy_must_be_positive(self):
        with pytest.raises(ValueError):
            EntitlementPolicy(aay_kg_per_household_per_month=0.0)


class TestScaleDemand:
    def test_proportional(self):
        out = scale_demand_to_state({0: 1.0, 1: 3.0}, 8.0)
        assert out == {0: pytest.approx(2.0), 1: pytest.approx(6.0)}

    def test_identity(self):
        out = scale_demand_to_state({0: 2.0, 1: 6.0}, 8.0)
        assert out[0] == pytest.approx(2.0)

    def test_zero_aggregate(self):
        with pytest.raises(ZeroAggregate):
            scale_demand_to_state({0: 0.0, 1: 0.0}, 5.0)


class TestBaseline:
    def test_published_slope_substitution(self):
        model = UndernourishmentModel(slope=83.67, intercept=0.0)
        assert baseline_undernourished(est(100, 1000), model) == pytest.approx(
            8.367, rel=1e-12
        )

    def test_zero_ratio_returns_intercept(self):
        model = UndernourishmentModel(slope=55.0, intercept=7.5)
        assert baseline_undernourished(est(0, 1000), model) == 7.5

    def test_clamped_at_100(self):
        model = UndernourishmentModel(slope=83.67, intercept=90.0)
        assert baseline_undernourished(est(500, 1000), model) == 100.0

    def test_degenerate_ratio(self):
        with pytest.raises(DegenerateRatio):
            baseline_undernourished(est(10, 0), UndernourishmentModel())


class TestFitLine:
    def test_exact_line_recovered(self):
        xs = [0.05, 0.1, 0.2, 0.3, 0.44]
        pts = [(x, 83.67 * x + 2.0) for x in xs]
        fit = fit_undernourishment_line(pts)
        assert fit.slope == pytest.approx(83.67, abs=1e-9)
        assert fit.intercept == pytest.approx(2.0, abs=1e-9)
        assert fit.slope_p_value == pytest.approx(0.0, abs=1e-12)

    def test_two_point_line(self):
        fit = fit_undernourishment_line([(0.0, 0.0), (1.0, 10.0)])
        assert fit.slope == pytest.approx(10.0)
        assert fit.intercept == pytest.approx(0.0, abs=1e-12)

    def test_noisy_17_states_recovers_generator_within_ci(self):
        rng = np.random.default_rng(42)
        true_slope, true_intercept = 83.67, 2.5
        xs = rng.uniform(0.05, 0.5, size=17)
        ys = true_slope * xs + true_intercept + rng.normal(0, 1.0, size=17)
        fit = fit_undernourishment_line(list(zip(xs, ys)))
        # 95% CI from the fit's own stderr (n-2 dof, t ~ 2.13)
        from scipy import stats

        res = stats.linregress(xs, ys)
        half_width = 2.131 * res.stderr
        assert abs(fit.slope - true_slope) < half_width
        assert fit.slope_p_value < 1e-6

    def test_through_origin_variant(self):
        pts = [(x, 12.0 * x) for x in (0.1, 0.2, 0.5)]
        fit = fit_undernourishment_line(pts, include_intercept=False)
        assert fit.slope == pytest.approx(12.0, abs=1e-12)
        assert fit.intercept == 0.0

    def test_degenerate_design(self):
        with pytest.raises(DegenerateDesign):
            fit_undernourishment_line([(0.2, 1.0), (0.2, 2.0), (0.2, 3.0)])
        with pytest.raises(DegenerateDesign):
            fit_undernourishment_line([(0.2, 1.0)])

    def test_intercept_for_pinned_slope(self):
        pts = [(0.1, 83.67 * 0.1 + 3.0), (0.3, 83.67 * 0.3 + 3.0)]
        assert intercept_for_slope(pts, 83.67) == pytest.approx(3.0)

    def test_line_fit_to_model(self):
        model = LineFit(80.0, 1.0, 0.01).to_model(spike_gain=2.0)
        assert model.slope == 80.0 and model.spike_gain == 2.0


class TestDynamic:
    MODEL = UndernourishmentModel(slope=83.67, intercept=0.0, spike_gain=1.0)

    def test_no_unmet_is_identity(self):
        assert dynamic_undernourished(12.5, 0.0, 100.0, 0.5, self.MODEL) == 12.5

    def test_direct_substitution(self):
        out = dynamic_undernourished(10.0, 50.0, 100.0, 0.6, self.MODEL)
        assert out == pytest.approx(40.0)

    def test_clamped(self):
        assert dynamic_undernourished(95.0, 100.0, 100.0, 1.0, self.MODEL) == 100.0

    def test_zero_demand_returns_baseline(self):
        assert dynamic_undernourished(33.0, 0.0, 0.0, 0.5, self.MODEL) == 33.0

    @given(
        unmet=st.lists(st.floats(0.0, 100.0), min_size=2, max_size=2).map(sorted),
        share=st.floats(0.0, 1.0),
        baseline=st.floats(0.0, 100.0),
    )
    @settings(max_examples=60)
    def test_monotone_in_unmet(self, unmet, share, baseline):
        lo = dynamic_undernourished(baseline, unmet[0], 100.0, share, self.MODEL)
        hi = dynamic_undernourished(baseline, unmet[1], 100.0, share, self.MODEL)
        assert hi >= lo

    def test_rejects_unmet_above_demand(self):
        with pytest.raises(ValueError):
            dynamic_undernourished(10.0, 101.0, 100.0, 0.5, self.MODEL)
