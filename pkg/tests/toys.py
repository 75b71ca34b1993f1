"""Small deterministic scenario builders shared across test modules."""

import numpy as np

from pdsflow.domain import (
    CardholderEstimate,
    DistrictRecord,
    DriveTimeMatrix,
    PriceContext,
    Stage,
)
from pdsflow.scenario import ScenarioSpec, SimBundle


def flat_prices(msp=20.0, msp_last=20.0, market=22.0, market_last=22.0):
    return PriceContext(msp, msp_last, market, market_last)


def uniform_districts(n, pop=100_000, rural_share=0.8, fam=5.0, first_id=1):
    out = []
    for i in range(first_id, first_id + n):
        rural = int(pop * rural_share)
        out.append(DistrictRecord(i, f"D{i}", pop, rural, pop - rural, fam))
    return out


def uniform_cards(ids, aay=1000.0, pri=40_000.0):
    return [CardholderEstimate(d, aay, pri, Stage.CAPPED) for d in ids]


def circle_matrix(ids, radius_minutes=120.0):
    """Districts on a circle; pairwise drive times from chord lengths."""
    n = len(ids)
    angles = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    x = radius_minutes * np.cos(angles)
    y = radius_minutes * np.sin(angles)
    m = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    return DriveTimeMatrix(tuple(ids), m)


def toy_bundle(n=4, yields_kg=None, pop=100_000, aay=1000.0, pri=40_000.0, **kw):
    districts = uniform_districts(n, pop=pop)
    ids = [d.id for d in districts]
    if yields_kg is None:
        yields_kg = {d: 0.0 for d in ids}
    return SimBundle(
        districts=districts,
        cardholders=uniform_cards(ids, aay, pri),
        drive_times=circle_matrix(ids),
        yields_kg=yields_kg,
        **kw,
    )


def toy_spec(**kw):
    kw.setdefault("prices", flat_prices())
    kw.setdefault("horizon_weeks", 30)
    kw.setdefault("state_production_total_kg", None)
    return ScenarioSpec(**kw)
