import datetime as dt

import numpy as np
import pytest

from pdsflow.calibration import (
    YearMode,
    aggregate_to_state_monthly,
    compare_series,
    depletion_rate_from_year,
)
from pdsflow.errors import ConstantSeries, LengthMismatch, MissingYear
from pdsflow.scenario import TRACE_METRICS, SimulationTrace

APR1 = dt.date(2019, 4, 1)


def make_trace(procured, anchor=APR1):
    procured = np.asarray(procured, dtype=float)
    horizon, n = procured.shape
    metrics = {m: np.zeros((horizon, n)) for m in TRACE_METRICS}
    metrics["procured_storage"] = procured
    return SimulationTrace(
        district_ids=tuple(range(1, n + 1)),
        horizon=horizon,
        anchor=anchor,
        metrics=metrics,
        in_flight_kg=np.zeros(horizon),
        destroyed_kg=np.zeros(horizon),
        initial_mass_kg=float(np.sum(procured[0])),
        baseline_pct={d: 0.0 for d in range(1, n + 1)},
    )


class TestAggregateMonthly:
    def test_constant_single_district(self):
        trace = make_trace(np.full((8, 1), 100.0))
        out = aggregate_to_state_monthly(trace)
        assert out == [("2019-04", 100.0), ("2019-05", 100.0)]

    def test_additive_over_districts(self):
        trace = make_trace(np.column_stack([np.full(8, 40.0), np.full(8, 60.0)]))
        out = aggregate_to_state_monthly(trace)
        assert out == [("2019-04", 100.0), ("2019-05", 100.0)]

    def test_last_week_of_month_selected(self):
        # weeks 0-4 fall in April, 5-7 in May; storage = week + 1
        vals = np.arange(1, 9, dtype=float).reshape(8, 1)
        out = aggregate_to_state_monthly(make_trace(vals))
        assert out == [("2019-04", 5.0), ("2019-05", 8.0)]

    def test_linearity_in_district_partition(self):
        rng = np.random.default_rng(7)
        a = rng.uniform(0, 100, size=(10, 3))
        whole = aggregate_to_state_monthly(make_trace(a))
        parts = [
            aggregate_to_state_monthly(make_trace(a[:, [j]])) for j in range(3)
        ]
        for i, (month, total) in enumerate(whole):
            assert total == pytest.approx(sum(p[i][1] for p in parts))
            assert all(p[i][0] == month for p in parts)


class TestCompareSeries:
    def test_identity(self):
        out = compare_series([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert (out.rmse, out.mape, out.pearson_r) == (0.0, 0.0, pytest.approx(1.0))

    def test_constant_offset(self):
        out = compare_series([11.0, 12.0, 13.0], [1.0, 2.0, 3.0])
        assert out.rmse == pytest.approx(10.0)
        assert out.pearson_r == pytest.approx(1.0)

    def test_anticorrelated(self):
        out = compare_series([3.0, 2.0, 1.0], [1.0, 2.0, 3.0])
        assert out.pearson_r == pytest.approx(-1.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            compare_series([1.0], [1.0])
        with pytest.raises(LengthMismatch):
            compare_series([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_constant_series_has_no_r(self):
        with pytest.raises(ConstantSeries):
            compare_series([5.0, 5.0, 5.0], [1.0, 2.0, 3.0])

    def test_mape_skips_zero_truth(self):
        out = compare_series([2.0, 4.0, 1.0], [2.0, 2.0, 0.0])
        assert out.mape == pytest.approx(50.0)


def linear_year(year, start_kg, rate_per_week):
    out = []
    jan1 = dt.date(year, 1, 1)
    for m in range(1, 13):
        d = dt.date(year, m, 1)
        weeks = (d - jan1).days / 7.0
        out.append((f"{year:04d}-{m:02d}", start_kg - rate_per_week * weeks))
    return out


class TestDepletionRate:
    def test_constant_slope_recovered(self):
        series = linear_year(2019, 5200.0, 10.0)
        rate = depletion_rate_from_year(series, YearMode.SAME_YEAR, 2019)
        assert rate == pytest.approx(10.0)

    def test_prior_year(self):
        series = linear_year(2018, 5200.0, 20.0) + linear_year(2019, 5200.0, 10.0)
        assert depletion_rate_from_year(series, YearMode.PRIOR_YEAR, 2019) == pytest.approx(20.0)

    def test_multi_year_average_of_identical_years(self):
        series = linear_year(2017, 900.0, 12.0) + linear_year(2018, 900.0, 12.0)
        rate = depletion_rate_from_year(series, YearMode.MULTI_YEAR_AVERAGE, 2019)
        assert rate == pytest.approx(12.0)

    def test_multi_year_average_means_rates(self):
        series = linear_year(2017, 900.0, 10.0) + linear_year(2018, 900.0, 20.0)
        rate = depletion_rate_from_year(series, YearMode.MULTI_YEAR_AVERAGE, 2019)
        assert rate == pytest.approx(15.0)

    def test_missing_year(self):
        with pytest.raises(MissingYear):
            depletion_rate_from_year(linear_year(2019, 100.0, 1.0), YearMode.PRIOR_YEAR, 2019)

    def test_only_decreasing_segments_counted(self):
        series = [("2019-01", 100.0), ("2019-02", 150.0), ("2019-03", 80.0)]
        weeks = (dt.date(2019, 3, 1) - dt.date(2019, 2, 1)).days / 7.0
        rate = depletion_rate_from_year(series, YearMode.SAME_YEAR, 2019)
        assert rate == pytest.approx(70.0 / weeks)

    def test_flat_year_has_no_drawdown(self):
        series = [("2019-01", 100.0), ("2019-02", 100.0)]
        with pytest.raises(MissingYear):
            depletion_rate_from_year(series, YearMode.SAME_YEAR, 2019)


def test_self_calibration_closure():
    trace = make_trace(np.arange(1, 21, dtype=float).reshape(20, 1) * 7.0)
    series = aggregate_to_state_monthly(trace)
    vals = [v for _, v in series]
    out = compare_series(vals, vals)
    assert out.rmse == 0.0 and out.mape == 0.0 and out.pearson_r == pytest.approx(1.0)
