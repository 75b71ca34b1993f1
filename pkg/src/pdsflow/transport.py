"""Inter-district shipment allocation on the fully connected district graph.

Greedy nearest-first matching: all (surplus holder, requester) pairs are
served in ascending drive-time order, ties broken by (from id, to id).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .domain import DriveTimeMatrix
from .engine import EngineParams


class AllocationMode(Enum):
    #: global greedy over (holder, requester) pairs sorted by drive time
    SHIPPER_PAIRS = "shipper_pairs"
    #: each requester pulls from its nearest holders, requesters in id order
    PER_REQUESTER = "per_requester"


@dataclass(frozen=True)
class Shipment:
    from_district: int
    to_district: int
    kg: float
    dispatch_week: int
    arrival_week: int

    def __post_init__(self):
        if self.kg <= 0:
            raise ValueError("shipment mass must be > 0")
        if self.from_district == self.to_district:
            raise ValueError("shipment endpoints must differ")


@dataclass(frozen=True)
class ShipmentPlan:
    shipments: tuple[Shipment, ...] = ()

    @property
    def total_kg(self) -> float:
        return sum(s.kg for s in self.shipments)

    def outgoing(self, district_id: int) -> float:
        return sum(s.kg for s in self.shipments if s.from_district == district_id)

    def incoming(self, district_id: int) -> float:
        return sum(s.kg for s in self.shipments if s.to_district == district_id)


def allocate(
    requests: dict[int, float],
    surpluses: dict[int, float],
    dist: DriveTimeMatrix,
    week: int,
    params: EngineParams,
    mode: AllocationMode = AllocationMode.SHIPPER_PAIRS,
) -> ShipmentPlan:
    """Match surpluses to requests, nearest pairs first.

    Ships min(remaining surplus, remaining request) per pair until one side
    clears, so the plan total is min(sum requests, sum surpluses). The pair
    order is a strict total order, making the plan deterministic.
    """
    remaining_req = {d: v for d, v in requests.items() if v > 0}
    remaining_sur = {d: v for d, v in surpluses.items() if v > 0}
    arrival = week + params.transport_latency
    shipments: list[Shipment] = []

    def ship(src: int, dst: int) -> None:
        kg = min(remaining_sur[src], remaining_req[dst])
        if kg <= 0:
            return
        shipments.append(Shipment(src, dst, kg, week, arrival))
        remaining_sur[src] -= kg
        remaining_req[dst] -= kg
        if remaining_sur[src] <= 0:
            del remaining_sur[src]
        if remaining_req[dst] <= 0:
            del remaining_req[dst]

    if mode is AllocationMode.SHIPPER_PAIRS:
        pairs = sorted(
            (
                (dist.between(src, dst), src, dst)
                for src in remaining_sur
                for dst in remaining_req
                if src != dst
            ),
        )
        for _, src, dst in pairs:
            if src in remaining_sur and dst in remaining_req:
                ship(src, dst)
    else:
        for dst in sorted(remaining_req):
            sources = sorted(
                (dist.between(src, dst), src)
                for src in remaining_sur
                if src != dst
            )
            for _, src in sources:
                if dst not in remaining_req:
                    break
                if src in remaining_sur:
                    ship(src, dst)

    return ShipmentPlan(tuple(shipments))
