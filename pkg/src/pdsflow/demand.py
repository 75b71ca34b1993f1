"""Weekly wheat demand and percent-undernourished estimation.

Monthly ration entitlements (35 kg per AAY household, 5 kg per Priority
person) convert to weekly rates via x12/52. Undernourishment is a linear
proxy in the AAY/Priority ratio, with a shortfall-driven spike term for
dynamic runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .domain import CardholderEstimate
from .errors import DegenerateDesign, DegenerateRatio, ZeroAggregate

WEEKS_PER_MONTH = 12.0 / 52.0


@dataclass(frozen=True)
class EntitlementPolicy:
    aay_kg_per_household_per_month: float = 35.0
    priority_kg_per_person_per_month: float = 5.0

    def __post_init__(self):
        if self.aay_kg_per_household_per_month <= 0:
            raise ValueError("AAY entitlement must be > 0")
        if self.priority_kg_per_person_per_month <= 0:
            raise ValueError("Priority entitlement must be > 0")


@dataclass(frozen=True)
class UndernourishmentModel:
    """Linear percent-undernourished model in the AAY/Priority ratio."""

    slope: float = 83.67
    intercept: float = 0.0
    spike_gain: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.slope):
            raise ValueError("slope must be finite")


def weekly_demand(
    est: CardholderEstimate, policy: EntitlementPolicy = EntitlementPolicy()
) -> float:
    """Subsidized wheat demand of one district, kg/week."""
    monthly = (
        est.aay_households * policy.aay_kg_per_household_per_month
        + est.priority_persons * policy.priority_kg_per_person_per_month
    )
    return monthly * WEEKS_PER_MONTH


def scale_demand_to_state(
    demands: dict[int, float], state_depletion_rate: float
) -> dict[int, float]:
    """Rescale district demands so their sum matches the state depletion rate."""
    agg = sum(demands.values())
    if agg <= 0:
        raise ZeroAggregate("district demands sum to 0; cannot scale")
    factor = state_depletion_rate / agg
    return {d: v * factor for d, v in demands.items()}


def _clamp_pct(x: float) -> float:
    return min(100.0, max(0.0, x))


def baseline_undernourished(
    est: CardholderEstimate, model: UndernourishmentModel
) -> float:
    """Static percent undernourished from the district's AAY/Priority ratio."""
    if est.priority_persons <= 0:
        raise DegenerateRatio(
            f"district {est.district_id} has no Priority cardholders"
        )
    ratio = est.aay_households / est.priority_persons
    return _clamp_pct(model.intercept + model.slope * ratio)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_p_value: float

    def to_model(self, spike_gain: float = 1.0) -> UndernourishmentModel:
        return UndernourishmentModel(self.slope, self.intercept, spike_gain)


def fit_undernourishment_line(
    state_table: list[tuple[float, float]], include_intercept: bool = True
) -> LineFit:
    """Least-squares line through state-level (ratio, pct undernourished) points."""
    if len(state_table) < 2:
        raise DegenerateDesign("need at least two data points")
    x = np.array([r for r, _ in state_table], dtype=float)
    y = np.array([p for _, p in state_table], dtype=float)
    if np.all(x == x[0]):
        raise DegenerateDesign("all ratios are equal; slope is undefined")

    if include_intercept:
        res = stats.linregress(x, y)
        return LineFit(float(res.slope), float(res.intercept), float(res.pvalue))

    # through-origin fit: slope = sum(xy)/sum(x^2), t-test with n-1 dof
    sxx = float(np.dot(x, x))
    slope = float(np.dot(x, y)) / sxx
    resid = y - slope * x
    dof = len(x) - 1
    se2 = float(np.dot(resid, resid)) / dof / sxx
    if se2 <= 0:
        return LineFit(slope, 0.0, 0.0)
    t = abs(slope) / math.sqrt(se2)
    p = 2.0 * float(stats.t.sf(t, dof))
    return LineFit(slope, 0.0, p)


def intercept_for_slope(state_table: list[tuple[float, float]], slope: float) -> float:
    """Best-fit intercept when the slope is pinned externally."""
    if not state_table:
        raise DegenerateDesign("need at least one data point")
    x = np.array([r for r, _ in state_table], dtype=float)
    y = np.array([p for _, p in state_table], dtype=float)
    return float(np.mean(y) - slope * np.mean(x))


def dynamic_undernourished(
    baseline: float,
    unmet_kg: float,
    demand_kg: float,
    cardholder_share: float,
    model: UndernourishmentModel,
) -> float:
    """Baseline plus a spike proportional to the unmet subsidized-demand share.

    The unmet fraction is weighted by the cardholder share of the district
    population, so a full shortfall pushes exactly the covered population
    into the undernourished count. Returns the baseline when demand is met.
    """
    if demand_kg <= 0:
        return _clamp_pct(baseline)
    if not 0 <= unmet_kg <= demand_kg:
        raise ValueError("need 0 <= unmet_kg <= demand_kg")
    if not 0 <= cardholder_share <= 1:
        raise ValueError("cardholder_share must lie in [0, 1]")
    spike = model.spike_gain * 100.0 * cardholder_share * (unmet_kg / demand_kg)
    return _clamp_pct(baseline + spike)
