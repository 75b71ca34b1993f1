"""State-level diagnostics: monthly aggregation, series comparison, and
depletion-rate extraction from ground-truth storage series."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .domain import WeekIndex
from .errors import ConstantSeries, LengthMismatch, MissingYear
from .scenario import SimulationTrace

#: (month, kg) pairs, month as "YYYY-MM", chronological.
MonthlySeries = list[tuple[str, float]]


def aggregate_to_state_monthly(trace: SimulationTrace) -> MonthlySeries:
    """State-level procured storage at the last simulated week of each month."""
    month_last_week: dict[str, int] = {}
    for w in range(trace.horizon):
        key = WeekIndex(w, trace.anchor).month_key
        month_last_week[key] = w
    storage = trace.metrics["procured_storage"]
    return [
        (key, float(np.sum(storage[w, :])))
        for key, w in sorted(month_last_week.items())
    ]


@dataclass(frozen=True)
class SeriesComparison:
    rmse: float
    mape: float
    pearson_r: float


def compare_series(
    model: list[float], truth: list[float]
) -> SeriesComparison:
    """RMSE, MAPE (over nonzero-truth entries), and Pearson correlation."""
    if len(model) != len(truth) or len(model) < 2:
        raise LengthMismatch(
            f"series lengths {len(model)} and {len(truth)} unusable (need equal, >= 2)"
        )
    m = np.asarray(model, dtype=float)
    t = np.asarray(truth, dtype=float)
    err = m - t
    rmse = float(np.sqrt(np.mean(err**2)))
    nz = t != 0
    mape = float(np.mean(np.abs(err[nz] / t[nz])) * 100.0) if nz.any() else 0.0
    if np.all(m == m[0]) or np.all(t == t[0]):
        raise ConstantSeries("pearson r undefined for a constant series")
    mc = m - m.mean()
    tc = t - t.mean()
    r = float(np.dot(mc, tc) / math.sqrt(np.dot(mc, mc) * np.dot(tc, tc)))
    return SeriesComparison(rmse=rmse, mape=mape, pearson_r=r)


class YearMode(Enum):
    SAME_YEAR = "SameYear"
    PRIOR_YEAR = "PriorYear"
    MULTI_YEAR_AVERAGE = "MultiYearAverage"


def _month_date(key: str) -> dt.date:
    year, month = key.split("-")
    return dt.date(int(year), int(month), 1)


def _drawdown_rate(points: list[tuple[str, float]]) -> float | None:
    """Mean weekly decrease over the strictly decreasing segments."""
    lost = 0.0
    weeks = 0.0
    for (k0, v0), (k1, v1) in zip(points, points[1:]):
        if v1 < v0:
            lost += v0 - v1
            weeks += (_month_date(k1) - _month_date(k0)).days / 7.0
    if weeks == 0:
        return None
    return lost / weeks


def depletion_rate_from_year(
    series: MonthlySeries,
    year_mode: YearMode,
    target_year: int,
) -> float:
    """Weekly depletion rate of state storage, from the selected year(s).

    SAME_YEAR uses the target year's drawdown, PRIOR_YEAR the year before,
    and MULTI_YEAR_AVERAGE the mean over every year before the target that
    has a drawdown segment.
    """
    by_year: dict[int, list[tuple[str, float]]] = {}
    for key, v in series:
        by_year.setdefault(_month_date(key).year, []).append((key, v))
    for pts in by_year.values():
        pts.sort()

    def rate_for(year: int) -> float:
        if year not in by_year:
            raise MissingYear(f"year {year} absent from storage series")
        r = _drawdown_rate(by_year[year])
        if r is None:
            raise MissingYear(f"year {year} has no drawdown segment")
        return r

    if year_mode is YearMode.SAME_YEAR:
        return rate_for(target_year)
    if year_mode is YearMode.PRIOR_YEAR:
        return rate_for(target_year - 1)
    rates = []
    for year in sorted(by_year):
        if year >= target_year:
            continue
        r = _drawdown_rate(by_year[year])
        if r is not None:
            rates.append(r)
    if not rates:
        raise MissingYear(f"no drawdown data before {target_year}")
    return float(sum(rates) / len(rates))
