import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdsflow.domain import DriveTimeMatrix
from pdsflow.engine import EngineParams
from pdsflow.transport import AllocationMode, ShipmentPlan, allocate

PARAMS = EngineParams(transport_latency=1)


def matrix(n, kind="distinct"):
    ids = tuple(range(n))
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                m[i, j] = (i + 1) * (j + 1) if kind == "distinct" else 10.0
    return DriveTimeMatrix(ids, m)


def custom_matrix(ids, entries):
    n = len(ids)
    idx = {d: i for i, d in enumerate(ids)}
    m = np.zeros((n, n))
    for (a, b), v in entries.items():
        m[idx[a], idx[b]] = v
        m[idx[b], idx[a]] = v
    return DriveTimeMatrix(tuple(ids), m)


def oracle_allocate(requests, surpluses, dist):
    """Independent reference: repeatedly ship the closest live pair.

    Re-scans all remaining (holder, requester) pairs each round and picks
    the minimum of (drive time, from id, to id) by explicit comparison; no
    shared code with the production allocator.
    """
    req = {d: v for d, v in requests.items() if v > 0}
    sur = {d: v for d, v in surpluses.items() if v > 0}
    ships = []
    while req and sur:
        best = None
        for s in sur:
            for r in req:
                if s == r:
                    continue
                key = (dist.between(s, r), s, r)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        _, s, r = best
        kg = min(sur[s], req[r])
        ships.append((s, r, kg))
        sur[s] -= kg
        req[r] -= kg
        if sur[s] <= 0:
            del sur[s]
        if req[r] <= 0:
            del req[r]
    return ships


def as_triples(plan: ShipmentPlan):
    return [(s.from_district, s.to_district, s.kg) for s in plan.shipments]


class TestAllocateBasics:
    def test_single_pair(self):
        plan = allocate({0: 10.0}, {1: 50.0}, matrix(2), 4, PARAMS)
        assert as_triples(plan) == [(1, 0, 10.0)]
        assert plan.shipments[0].dispatch_week == 4
        assert plan.shipments[0].arrival_week == 5

    def test_nearest_first_exhausts_close_requester(self):
        # holder 2; dist(2,1)=5 < dist(2,3)=9: fill 1 fully, then 3 partially
        dist = custom_matrix([1, 2, 3], {(2, 1): 5.0, (2, 3): 9.0, (1, 3): 20.0})
        plan = allocate({1: 10.0, 3: 10.0}, {2: 15.0}, dist, 0, PARAMS)
        assert as_triples(plan) == [(2, 1, 10.0), (2, 3, 5.0)]

    def test_no_surplus_empty_plan(self):
        plan = allocate({0: 10.0, 1: 5.0}, {}, matrix(3), 0, PARAMS)
        assert plan.shipments == ()
        assert plan.total_kg == 0.0

    def test_tie_break_by_from_then_to(self):
        dist = matrix(4, kind="equal")
        plan = allocate({2: 5.0, 3: 5.0}, {0: 4.0, 1: 20.0}, dist, 0, PARAMS)
        # all distances equal: pairs in (from, to) order: (0,2),(0,3),(1,2),(1,3)
        assert as_triples(plan) == [(0, 2, 4.0), (1, 2, 1.0), (1, 3, 5.0)]

    def test_per_requester_mode_differs(self):
        dist = custom_matrix([1, 2, 3], {(3, 1): 9.0, (3, 2): 5.0, (1, 2): 1.0})
        req = {1: 10.0, 2: 10.0}
        sur = {3: 15.0}
        shipper = allocate(req, sur, dist, 0, PARAMS)
        assert as_triples(shipper) == [(3, 2, 10.0), (3, 1, 5.0)]
        pull = allocate(req, sur, dist, 0, PARAMS, AllocationMode.PER_REQUESTER)
        assert as_triples(pull) == [(3, 1, 10.0), (3, 2, 5.0)]

    def test_determinism(self):
        req = {0: 7.0, 2: 9.0}
        sur = {1: 5.0, 3: 30.0}
        a = allocate(req, sur, matrix(4), 1, PARAMS)
        b = allocate(req, sur, matrix(4), 1, PARAMS)
        assert a == b


@given(
    req=st.lists(st.floats(0, 100), min_size=2, max_size=8),
    sur=st.lists(st.floats(0, 100), min_size=2, max_size=8),
)
@settings(max_examples=120)
def test_conservation_and_full_clearing(req, sur):
    n = max(len(req), len(sur))
    requests = {i: v for i, v in enumerate(req)}
    surpluses = {i + n: v for i, v in enumerate(sur)}  # disjoint ids
    ids = sorted(set(requests) | set(surpluses))
    idx = {d: i for i, d in enumerate(ids)}
    m = np.zeros((len(ids), len(ids)))
    for a in ids:
        for b in ids:
            if a != b:
                m[idx[a], idx[b]] = abs(a - b) * 3.0 + min(a, b)
    dist = DriveTimeMatrix(tuple(ids), m)
    plan = allocate(requests, surpluses, dist, 0, PARAMS)
    for d in surpluses:
        assert plan.outgoing(d) <= surpluses[d] + 1e-9
    for d in requests:
        assert plan.incoming(d) <= requests[d] + 1e-9
    want = min(sum(requests.values()), sum(surpluses.values()))
    assert plan.total_kg == pytest.approx(want, abs=1e-9)


def _states(quantities):
    """Encode one district as idle / requester(q) / holder(q)."""
    for q in quantities:
        yield ("idle", 0)
        yield ("req", q)
        yield ("sur", q)


def _run_instance(assignment, dist):
    requests = {i: float(q) for i, (kind, q) in enumerate(assignment) if kind == "req" and q > 0}
    surpluses = {i: float(q) for i, (kind, q) in enumerate(assignment) if kind == "sur" and q > 0}
    plan = allocate(requests, surpluses, dist, 0, PARAMS)
    assert as_triples(plan) == oracle_allocate(requests, surpluses, dist)


@pytest.mark.parametrize("kind", ["distinct", "equal"])
def test_matches_oracle_exhaustive_small(kind):
    """Every 3-district instance over quantities {0, 1, 7, 20}."""
    states = list(_states([1, 7, 20]))
    dist = matrix(3, kind)
    for assignment in itertools.product(states, repeat=3):
        _run_instance(assignment, dist)


@given(
    n=st.integers(2, 5),
    picks=st.lists(st.tuples(st.sampled_from(["idle", "req", "sur"]), st.integers(0, 20)), min_size=5, max_size=5),
    kind=st.sampled_from(["distinct", "equal"]),
)
@settings(max_examples=150)
def test_matches_oracle_randomized(n, picks, kind):
    _run_instance(picks[:n], matrix(n, kind))


def test_shipment_validation():
    from pdsflow.transport import Shipment

    with pytest.raises(ValueError):
        Shipment(1, 1, 5.0, 0, 1)
    with pytest.raises(ValueError):
        Shipment(1, 2, 0.0, 0, 1)
