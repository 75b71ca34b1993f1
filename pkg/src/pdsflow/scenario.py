"""Scenario construction, event application, and full multi-week runs.

A run advances every district one week at a time: events fire first, then
each district steps (receiving any shipments due that week), then requests
and surpluses are matched into new shipments that arrive after the
transport latency, and finally the week's row is recorded in the trace.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .demand import (
    EntitlementPolicy,
    UndernourishmentModel,
    baseline_undernourished,
    dynamic_undernourished,
    scale_demand_to_state,
    weekly_demand,
)
from .domain import (
    DEFAULT_ANCHOR,
    DEFAULT_HORIZON,
    CardholderEstimate,
    DistrictRecord,
    DistrictStockState,
    DriveTimeMatrix,
    HarvestRecord,
    PriceContext,
)
from .engine import (
    EngineParams,
    Eq2Convention,
    compute_request,
    compute_surplus,
    step_district,
)
from .errors import SpecError, UnknownDistrict, ZeroAggregate
from .transport import AllocationMode, allocate

#: Ground-truth statewide wheat production used to rescale seeded yields
#: (32.6 million metric tonnes, in kg).
DEFAULT_STATE_PRODUCTION_KG = 32.6e9


@dataclass(frozen=True)
class FloodEvent:
    week: int
    district_ids: tuple[int, ...]
    destroyed_fraction: float
    include_farm_storage: bool = False

    def __post_init__(self):
        if not 0 <= self.destroyed_fraction <= 1:
            raise SpecError("destroyed_fraction must lie in [0, 1]")
        if not self.district_ids:
            raise SpecError("flood event needs at least one district")


@dataclass(frozen=True)
class MspChangeEvent:
    effective_week: int
    new_msp: float

    def __post_init__(self):
        if self.new_msp <= 0:
            raise SpecError("new_msp must be > 0")


@dataclass(frozen=True)
class YieldSeedEvent:
    """Replaces the produced-wheat seed before week 0."""

    yields_kg: dict[int, float]
    state_total_override_kg: float | None = None

    def __post_init__(self):
        if not self.yields_kg:
            raise SpecError("yield seed needs at least one district")
        if any(v < 0 for v in self.yields_kg.values()):
            raise SpecError("seeded yields must be >= 0")


ScenarioEvent = FloodEvent | MspChangeEvent | YieldSeedEvent


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation request: horizon, prices, events, parameter overrides."""

    prices: PriceContext
    name: str = "scenario"
    horizon_weeks: int = DEFAULT_HORIZON
    anchor: dt.date = DEFAULT_ANCHOR
    events: tuple[ScenarioEvent, ...] = ()
    engine: EngineParams = EngineParams()
    allocation_mode: AllocationMode = AllocationMode.SHIPPER_PAIRS
    entitlement: EntitlementPolicy = EntitlementPolicy()
    state_production_total_kg: float | None = DEFAULT_STATE_PRODUCTION_KG
    last_year_procured_share: float = 0.5
    initial_procured_weeks: float | None = None
    initial_procured_kg: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon_weeks < 0:
            raise SpecError("horizon_weeks must be >= 0")
        if not 0 <= self.last_year_procured_share <= 1:
            raise SpecError("last_year_procured_share must lie in [0, 1]")
        for ev in self.events:
            week = ev.week if isinstance(ev, FloodEvent) else (
                ev.effective_week if isinstance(ev, MspChangeEvent) else 0
            )
            if not 0 <= week < max(self.horizon_weeks, 1):
                raise SpecError(f"event week {week} outside horizon")

    def validate_districts(self, known_ids: set[int]) -> None:
        """Cross-check event district references against the dataset."""
        for ev in self.events:
            if isinstance(ev, FloodEvent):
                unknown = [d for d in ev.district_ids if d not in known_ids]
            elif isinstance(ev, YieldSeedEvent):
                unknown = [d for d in ev.yields_kg if d not in known_ids]
            else:
                unknown = []
            if unknown:
                raise UnknownDistrict(f"unknown district ids {sorted(unknown)}")


def _event_from_dict(obj: dict) -> ScenarioEvent:
    kind = obj.get("type")
    try:
        if kind == "flood":
            return FloodEvent(
                week=int(obj["week"]),
                district_ids=tuple(int(d) for d in obj["district_ids"]),
                destroyed_fraction=float(obj["destroyed_fraction"]),
                include_farm_storage=bool(obj.get("include_farm_storage", False)),
            )
        if kind == "msp_change":
            return MspChangeEvent(
                effective_week=int(obj["effective_week"]),
                new_msp=float(obj["new_msp"]),
            )
        if kind == "yield_seed":
            override = obj.get("state_total_override_kg")
            return YieldSeedEvent(
                yields_kg={int(k): float(v) for k, v in obj["yields_kg"].items()},
                state_total_override_kg=None if override is None else float(override),
            )
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed {kind or 'event'}: {exc}") from exc
    raise SpecError(f"unknown event type {kind!r}")


def spec_from_dict(obj: dict) -> ScenarioSpec:
    """Parse a scenario JSON document; raises SpecError on any shape problem."""
    if not isinstance(obj, dict):
        raise SpecError("scenario document must be a JSON object")
    try:
        prices_obj = obj["prices"]
        prices = PriceContext(
            msp=float(prices_obj["msp"]),
            msp_last_year=float(prices_obj["msp_last_year"]),
            market_price=float(prices_obj["market_price"]),
            market_price_last_year=float(prices_obj["market_price_last_year"]),
        )
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise SpecError("params must be an object")
        engine = EngineParams(
            waste_fraction=float(params.get("waste_fraction", 0.05)),
            reserve_weeks=int(params.get("reserve_weeks", 4)),
            harvest_window=frozenset(
                int(w) for w in params.get("harvest_window", range(5))
            ),
            transport_latency=int(params.get("transport_latency_weeks", 1)),
            eq2_convention=Eq2Convention(
                params.get("eq2_convention", "as_stated_text")
            ),
        )
        entitlement = EntitlementPolicy(
            aay_kg_per_household_per_month=float(
                params.get("aay_kg_per_household_per_month", 35.0)
            ),
            priority_kg_per_person_per_month=float(
                params.get("priority_kg_per_person_per_month", 5.0)
            ),
        )
        total = params.get("state_production_total_kg", DEFAULT_STATE_PRODUCTION_KG)
        anchor = obj.get("anchor_date")
        init_kg = params.get("initial_procured_kg", {})
        init_weeks = params.get("initial_procured_weeks")
        spec = ScenarioSpec(
            prices=prices,
            name=str(obj.get("name", "scenario")),
            horizon_weeks=int(obj.get("horizon_weeks", DEFAULT_HORIZON)),
            anchor=dt.date.fromisoformat(anchor) if anchor else DEFAULT_ANCHOR,
            events=tuple(_event_from_dict(e) for e in obj.get("events", [])),
            engine=engine,
            allocation_mode=AllocationMode(
                params.get("allocation_mode", "shipper_pairs")
            ),
            entitlement=entitlement,
            state_production_total_kg=None if total is None else float(total),
            last_year_procured_share=float(
                params.get("last_year_procured_share", 0.5)
            ),
            initial_procured_weeks=None if init_weeks is None else float(init_weeks),
            initial_procured_kg={int(k): float(v) for k, v in init_kg.items()},
        )
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed scenario: {exc}") from exc
    return spec


def spec_from_json(text: str) -> ScenarioSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    return spec_from_dict(obj)


def spec_to_dict(spec: ScenarioSpec) -> dict:
    """Canonical JSON form; inverse of spec_from_dict."""
    events = []
    for ev in spec.events:
        if isinstance(ev, FloodEvent):
            events.append(
                {
                    "type": "flood",
                    "week": ev.week,
                    "district_ids": list(ev.district_ids),
                    "destroyed_fraction": ev.destroyed_fraction,
                    "include_farm_storage": ev.include_farm_storage,
                }
            )
        elif isinstance(ev, MspChangeEvent):
            events.append(
                {
                    "type": "msp_change",
                    "effective_week": ev.effective_week,
                    "new_msp": ev.new_msp,
                }
            )
        else:
            events.append(
                {
                    "type": "yield_seed",
                    "yields_kg": {str(k): v for k, v in sorted(ev.yields_kg.items())},
                    "state_total_override_kg": ev.state_total_override_kg,
                }
            )
    return {
        "name": spec.name,
        "horizon_weeks": spec.horizon_weeks,
        "anchor_date": spec.anchor.isoformat(),
        "prices": {
            "msp": spec.prices.msp,
            "msp_last_year": spec.prices.msp_last_year,
            "market_price": spec.prices.market_price,
            "market_price_last_year": spec.prices.market_price_last_year,
        },
        "events": events,
        "params": {
            "waste_fraction": spec.engine.waste_fraction,
            "reserve_weeks": spec.engine.reserve_weeks,
            "harvest_window": sorted(spec.engine.harvest_window),
            "transport_latency_weeks": spec.engine.transport_latency,
            "eq2_convention": spec.engine.eq2_convention.value,
            "allocation_mode": spec.allocation_mode.value,
            "aay_kg_per_household_per_month": spec.entitlement.aay_kg_per_household_per_month,
            "priority_kg_per_person_per_month": spec.entitlement.priority_kg_per_person_per_month,
            "state_production_total_kg": spec.state_production_total_kg,
            "last_year_procured_share": spec.last_year_procured_share,
            "initial_procured_weeks": spec.initial_procured_weeks,
            "initial_procured_kg": {
                str(k): v for k, v in sorted(spec.initial_procured_kg.items())
            },
        },
    }


@dataclass(frozen=True)
class SimBundle:
    """Everything a run needs beyond the scenario document itself."""

    districts: list[DistrictRecord]
    cardholders: list[CardholderEstimate]
    drive_times: DriveTimeMatrix
    yields_kg: dict[int, float]
    undernourishment: UndernourishmentModel = UndernourishmentModel()
    state_depletion_rate_kg_per_week: float | None = None

    def district_ids(self) -> list[int]:
        return sorted(d.id for d in self.districts)


#: Trace metrics, in emission order.
TRACE_METRICS = (
    "produced_wheat",
    "farm_storage",
    "farm_waste",
    "market_purchased",
    "procured_storage",
    "surplus_wheat",
    "imported_procured",
    "consumer_purchased",
    "consumed",
    "weekly_consumption",
    "request_kg",
    "shipped_in_kg",
    "shipped_out_kg",
    "unmet_kg",
    "pct_undernourished",
)


@dataclass(frozen=True)
class SimulationTrace:
    """Complete week x district grid of stocks, flows, and undernourishment."""

    district_ids: tuple[int, ...]
    horizon: int
    anchor: dt.date
    metrics: dict[str, np.ndarray]
    in_flight_kg: np.ndarray
    destroyed_kg: np.ndarray
    initial_mass_kg: float
    baseline_pct: dict[int, float]
    scenario_name: str = "scenario"

    def series(self, metric: str, district_id: int) -> np.ndarray:
        col = self.district_ids.index(district_id)
        return self.metrics[metric][:, col]

    def total_mass_at(self, week: int) -> float:
        """Mass in all district stocks plus in-flight, at end of given week."""
        total = 0.0
        for name in DistrictStockState.MASS_STOCKS:
            total += float(np.sum(self.metrics[name][week, :]))
        return total + float(self.in_flight_kg[week])

    def mass_balance_error(self, week: int) -> float:
        """Relative conservation error of the week prefix ending at `week`."""
        expected = self.initial_mass_kg - float(np.sum(self.destroyed_kg[: week + 1]))
        actual = self.total_mass_at(week)
        return abs(actual - expected) / max(self.initial_mass_kg, 1.0)


def scale_production(district_yields: list[float], state_total: float) -> list[float]:
    """Rescale seeded yields so their aggregate matches the ground-truth total."""
    agg = sum(district_yields)
    if agg <= 0:
        raise ZeroAggregate("produced wheat sums to 0; cannot scale")
    factor = state_total / agg
    return [v * factor for v in district_yields]


def apply_event(
    states: dict[int, DistrictStockState],
    prices: PriceContext,
    event: ScenarioEvent,
) -> tuple[dict[int, DistrictStockState], PriceContext, float]:
    """Apply one event; returns (new states, new prices, destroyed kg)."""
    known = set(states)
    destroyed = 0.0
    if isinstance(event, FloodEvent):
        unknown = [d for d in event.district_ids if d not in known]
        if unknown:
            raise UnknownDistrict(f"flood references unknown districts {unknown}")
        keep = 1.0 - event.destroyed_fraction
        out = dict(states)
        for d in event.district_ids:
            s = out[d]
            destroyed += s.procured_storage * event.destroyed_fraction
            farm = s.farm_storage
            if event.include_farm_storage:
                destroyed += farm * event.destroyed_fraction
                farm *= keep
            out[d] = replace(
                s,
                procured_storage=s.procured_storage * keep,
                surplus_wheat=s.surplus_wheat * keep,
                farm_storage=farm,
            )
        return out, prices, destroyed
    if isinstance(event, MspChangeEvent):
        return states, replace(prices, msp=event.new_msp), 0.0
    if isinstance(event, YieldSeedEvent):
        unknown = [d for d in event.yields_kg if d not in known]
        if unknown:
            raise UnknownDistrict(f"yield seed references unknown districts {unknown}")
        seeds = dict(event.yields_kg)
        if event.state_total_override_kg is not None:
            ids = sorted(seeds)
            scaled = scale_production(
                [seeds[d] for d in ids], event.state_total_override_kg
            )
            seeds = dict(zip(ids, scaled))
        out = dict(states)
        for d, kg in seeds.items():
            out[d] = replace(out[d], produced_wheat=kg)
        return out, prices, 0.0
    raise SpecError(f"unsupported event {event!r}")


def run(spec: ScenarioSpec, bundle: SimBundle) -> SimulationTrace:
    """Execute the scenario over the full horizon; fully deterministic."""
    ids = bundle.district_ids()
    spec.validate_districts(set(ids))
    col = {d: i for i, d in enumerate(ids)}
    n = len(ids)
    est = {e.district_id: e for e in bundle.cardholders}
    missing = [d for d in ids if d not in est]
    if missing:
        raise UnknownDistrict(f"no cardholder estimate for districts {missing}")
    by_id = {d.id: d for d in bundle.districts}

    demands = {d: weekly_demand(est[d], spec.entitlement) for d in ids}
    if bundle.state_depletion_rate_kg_per_week is not None:
        demands = scale_demand_to_state(
            demands, bundle.state_depletion_rate_kg_per_week
        )

    yields = {d: float(bundle.yields_kg.get(d, 0.0)) for d in ids}
    if spec.state_production_total_kg is not None:
        scaled = scale_production(
            [yields[d] for d in ids], spec.state_production_total_kg
        )
        yields = dict(zip(ids, scaled))

    init_weeks = (
        spec.engine.reserve_weeks
        if spec.initial_procured_weeks is None
        else spec.initial_procured_weeks
    )
    states: dict[int, DistrictStockState] = {}
    for d in ids:
        procured0 = spec.initial_procured_kg.get(d, init_weeks * demands[d])
        s = DistrictStockState(
            produced_wheat=yields[d],
            procured_storage=procured0,
            weekly_consumption=demands[d],
        )
        states[d] = replace(s, surplus_wheat=compute_surplus(s, spec.engine))

    prices = spec.prices
    # yield seeds replace the production seed before week 0
    for ev in spec.events:
        if isinstance(ev, YieldSeedEvent):
            states, prices, _ = apply_event(states, prices, ev)

    baseline = {
        d: baseline_undernourished(est[d], bundle.undernourishment) for d in ids
    }
    share = {
        d: min(1.0, est[d].covered_persons(by_id[d].avg_family_size)
               / max(by_id[d].total_population, 1))
        for d in ids
    }

    harvests = {}
    for d in ids:
        nonwasted = yields[d] * (1.0 - spec.engine.waste_fraction)
        harvests[d] = HarvestRecord(
            last_year_nonwasted_harvest=nonwasted,
            last_year_procured=spec.last_year_procured_share * nonwasted,
        )

    horizon = spec.horizon_weeks
    metrics = {m: np.zeros((horizon, n)) for m in TRACE_METRICS}
    in_flight = np.zeros(horizon)
    destroyed = np.zeros(horizon)
    initial_mass = sum(states[d].total_mass() for d in ids)

    pending: dict[int, dict[int, float]] = {}
    for w in range(horizon):
        for ev in spec.events:
            if isinstance(ev, FloodEvent) and ev.week == w:
                states, prices, lost = apply_event(states, prices, ev)
                destroyed[w] += lost
            elif isinstance(ev, MspChangeEvent) and ev.effective_week == w:
                states, prices, _ = apply_event(states, prices, ev)

        arrivals = pending.pop(w, {})
        deltas = {}
        for d in ids:
            states[d], deltas[d] = step_district(
                states[d],
                spec.engine,
                w,
                arrivals.get(d, 0.0),
                harvests[d],
                prices,
            )

        requests = {d: compute_request(states[d], spec.engine) for d in ids}
        surpluses = {d: states[d].surplus_wheat for d in ids}
        plan = allocate(
            requests, surpluses, bundle.drive_times, w, spec.engine,
            spec.allocation_mode,
        )
        shipped_out = {d: 0.0 for d in ids}
        for shp in plan.shipments:
            shipped_out[shp.from_district] += shp.kg
            s = states[shp.from_district]
            states[shp.from_district] = replace(
                s,
                procured_storage=s.procured_storage - shp.kg,
                surplus_wheat=s.surplus_wheat - shp.kg,
            )
            pending.setdefault(shp.arrival_week, {}).setdefault(shp.to_district, 0.0)
            pending[shp.arrival_week][shp.to_district] += shp.kg

        for d in ids:
            i = col[d]
            s = states[d]
            for name in DistrictStockState.MASS_STOCKS + ("surplus_wheat",):
                metrics[name][w, i] = getattr(s, name)
            metrics["weekly_consumption"][w, i] = s.weekly_consumption
            metrics["request_kg"][w, i] = requests[d]
            metrics["shipped_in_kg"][w, i] = deltas[d].arrivals
            metrics["shipped_out_kg"][w, i] = shipped_out[d]
            metrics["unmet_kg"][w, i] = deltas[d].unmet
            metrics["pct_undernourished"][w, i] = dynamic_undernourished(
                baseline[d],
                deltas[d].unmet,
                s.weekly_consumption,
                share[d],
                bundle.undernourishment,
            )
        in_flight[w] = sum(sum(v.values()) for v in pending.values())

    return SimulationTrace(
        district_ids=tuple(ids),
        horizon=horizon,
        anchor=spec.anchor,
        metrics=metrics,
        in_flight_kg=in_flight,
        destroyed_kg=destroyed,
        initial_mass_kg=initial_mass,
        baseline_pct=baseline,
        scenario_name=spec.name,
    )
