"""Weekly stock-and-flow update for a single district node.

Flow order within a week: harvest inflow -> waste -> market/procurement
split -> import arrivals -> subsidized consumption -> surplus earmark.
The step is pure: it returns a new state plus a record of every flow.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .domain import DistrictStockState, HarvestRecord, PriceContext


class Eq2Convention(Enum):
    """Direction of the price factor in the market-purchase rule.

    The printed formula multiplies last year's market quantity by
    MSP ratio x inverse market-price ratio, which moves wheat toward the
    market when MSP rises; the surrounding prose states the opposite
    economics. ``AS_STATED_TEXT`` (default) follows the prose: an MSP
    increase pulls wheat out of the market into procurement.
    """

    AS_STATED_TEXT = "as_stated_text"
    AS_PRINTED_FORMULA = "as_printed_formula"


@dataclass(frozen=True)
class EngineParams:
    waste_fraction: float = 0.05
    reserve_weeks: int = 4
    harvest_window: frozenset[int] = frozenset(range(5))
    transport_latency: int = 1
    eq2_convention: Eq2Convention = Eq2Convention.AS_STATED_TEXT

    def __post_init__(self):
        if not 0 <= self.waste_fraction < 1:
            raise ValueError("waste_fraction must lie in [0, 1)")
        if self.reserve_weeks < 0 or int(self.reserve_weeks) != self.reserve_weeks:
            raise ValueError("reserve_weeks must be a non-negative integer")
        if not self.harvest_window:
            raise ValueError("harvest_window must be non-empty")
        if self.transport_latency < 1:
            raise ValueError("transport_latency must be >= 1 week")
        object.__setattr__(self, "harvest_window", frozenset(self.harvest_window))


def market_split(
    h: HarvestRecord,
    p: PriceContext,
    convention: Eq2Convention = Eq2Convention.AS_STATED_TEXT,
    cap_kg: float | None = None,
) -> float:
    """Wheat (kg/year) leaving farm storage for the open market.

    Base quantity is last year's market purchase (non-wasted harvest minus
    procurement); the price factor moves it with the year-over-year MSP and
    market-price changes under the configured convention. Clamped to
    [0, cap_kg] when a cap (this year's non-wasted harvest) is supplied.
    """
    base = h.last_year_nonwasted_harvest - h.last_year_procured
    msp_ratio = p.msp / p.msp_last_year
    market_ratio = p.market_price / p.market_price_last_year
    if convention is Eq2Convention.AS_STATED_TEXT:
        factor = market_ratio / msp_ratio
    else:
        factor = msp_ratio / market_ratio
    qty = max(0.0, base * factor)
    if cap_kg is not None:
        qty = min(qty, cap_kg)
    return qty


@dataclass(frozen=True)
class StepDelta:
    """Every flow of one district-week, for tracing and mass audits."""

    harvest_inflow: float = 0.0
    waste: float = 0.0
    market: float = 0.0
    procured_from_farm: float = 0.0
    arrivals: float = 0.0
    consumed: float = 0.0
    unmet: float = 0.0
    surplus_after: float = 0.0
    request_after: float = 0.0


def compute_request(s: DistrictStockState, params: EngineParams) -> float:
    """Import request: shortfall against the reserve-weeks stock target."""
    need = params.reserve_weeks * s.weekly_consumption
    return max(0.0, need - s.procured_storage)


def compute_surplus(s: DistrictStockState, params: EngineParams) -> float:
    """Stock above the reserve target, offered for transport (earmark only)."""
    need = params.reserve_weeks * s.weekly_consumption
    return max(0.0, s.procured_storage - need)


def step_district(
    s: DistrictStockState,
    params: EngineParams,
    week: int,
    arrivals_kg: float = 0.0,
    harvest: HarvestRecord | None = None,
    prices: PriceContext | None = None,
) -> tuple[DistrictStockState, StepDelta]:
    """Advance one district one week; returns the new state and its flows.

    The remaining produced wheat is released evenly over the harvest-window
    weeks. Each week's release loses the waste fraction, sells the weekly
    share of the market-split quantity, and procures the rest. Arrivals pass
    through the import stock into procured storage before consumption.
    """
    if arrivals_kg < 0:
        raise ValueError("arrivals_kg must be >= 0")

    produced = s.produced_wheat
    farm = s.farm_storage
    waste_stock = s.farm_waste
    market_stock = s.market_purchased
    procured = s.procured_storage
    consumed_stock = s.consumed + s.consumer_purchased

    inflow = waste = market = to_procured = 0.0
    if week in params.harvest_window and produced > 0:
        weeks_left = sum(1 for w in params.harvest_window if w >= week)
        inflow = produced / weeks_left
        produced -= inflow
        farm += inflow

        waste = params.waste_fraction * inflow
        nonwasted = inflow - waste
        farm -= inflow
        waste_stock += waste

        if harvest is not None and prices is not None:
            yearly = market_split(harvest, prices, params.eq2_convention)
            market = min(nonwasted, yearly / len(params.harvest_window))
        to_procured = nonwasted - market
        market_stock += market
        procured += to_procured

    # imports flush through the Imported Procured stock the week they land
    imported = s.imported_procured + arrivals_kg
    procured += imported
    imported = 0.0

    flow = min(s.weekly_consumption, procured)
    procured -= flow
    consumed_stock += flow
    unmet = s.weekly_consumption - flow

    new = replace(
        s,
        produced_wheat=produced,
        farm_storage=farm,
        farm_waste=waste_stock,
        market_purchased=market_stock,
        procured_storage=procured,
        imported_procured=imported,
        consumer_purchased=0.0,
        consumed=consumed_stock,
    )
    new = replace(new, surplus_wheat=compute_surplus(new, params))
    delta = StepDelta(
        harvest_inflow=inflow,
        waste=waste,
        market=market,
        procured_from_farm=to_procured,
        arrivals=arrivals_kg,
        consumed=flow,
        unmet=unmet,
        surplus_after=new.surplus_wheat,
        request_after=compute_request(new, params),
    )
    return new, delta
