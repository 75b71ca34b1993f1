"""Generate the synthetic 75-district example dataset under fixtures/up75.

Everything is seeded and deterministic. The tables mirror the real input
schemas (populations, census fractions with gaps, adjacency, drive times,
state totals, state undernourishment table, monthly storage, yields) but
all numbers are synthetic. A few small districts are engineered to
overflow their population cap so the redistribution step has real work.

Run from the repo root:  python scripts/make_fixture.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pdsflow.dataio import (
    DatasetPaths,
    build_bundle,
    load_dataset,
    write_adjacency_csv,
    write_districts_csv,
    write_drivetimes_csv,
    write_fractions_csv,
    write_yields_csv,
)
from pdsflow.domain import DistrictRecord
from pdsflow.rations import SERIES, CensusFractionTable, FractionRow
from pdsflow.scenario import run, spec_from_dict

NAMES = [
    "Agra", "Aligarh", "Ambedkar Nagar", "Amethi", "Amroha", "Auraiya",
    "Ayodhya", "Azamgarh", "Baghpat", "Bahraich", "Ballia", "Balrampur",
    "Banda", "Barabanki", "Bareilly", "Basti", "Bhadohi", "Bijnor",
    "Budaun", "Bulandshahr", "Chandauli", "Chitrakoot", "Deoria", "Etah",
    "Etawah", "Farrukhabad", "Fatehpur", "Firozabad", "Gautam Buddha Nagar",
    "Ghaziabad", "Ghazipur", "Gonda", "Gorakhpur", "Hamirpur", "Hapur",
    "Hardoi", "Hathras", "Jalaun", "Jaunpur", "Jhansi", "Kannauj",
    "Kanpur Dehat", "Kanpur Nagar", "Kasganj", "Kaushambi", "Kheri",
    "Kushinagar", "Lalitpur", "Lucknow", "Maharajganj", "Mahoba",
    "Mainpuri", "Mathura", "Mau", "Meerut", "Mirzapur", "Moradabad",
    "Muzaffarnagar", "Pilibhit", "Pratapgarh", "Prayagraj", "Raebareli",
    "Rampur", "Saharanpur", "Sambhal", "Sant Kabir Nagar", "Shahjahanpur",
    "Shamli", "Shrawasti", "Siddharthnagar", "Sitapur", "Sonbhadra",
    "Sultanpur", "Unnao", "Varanasi",
]

OUT = Path(__file__).resolve().parents[1] / "fixtures" / "up75"


def main() -> None:
    assert len(NAMES) == 75, len(NAMES)
    rng = np.random.default_rng(20190401)
    n = 75
    ids = list(range(1, n + 1))
    OUT.mkdir(parents=True, exist_ok=True)

    # --- districts ---------------------------------------------------------
    pops = rng.integers(900_000, 4_800_000, size=n)
    # three deliberately small districts that will overflow after raking
    small = [22, 51, 69]  # Chitrakoot, Mahoba, Shrawasti
    for d in small:
        pops[d - 1] = rng.integers(320_000, 420_000)
    rural_share = rng.uniform(0.62, 0.88, size=n)
    fam = np.round(rng.uniform(4.9, 6.1, size=n), 1)
    districts = []
    for i, d in enumerate(ids):
        total = int(pops[i])
        rural = int(round(total * rural_share[i]))
        districts.append(
            DistrictRecord(d, NAMES[i], total, rural, total - rural, float(fam[i]))
        )
    write_districts_csv(OUT / "districts.csv", districts)

    # --- geometry: positions drive adjacency and drive times ---------------
    pts = rng.uniform(0.0, 600.0, size=(n, 2))
    tri = Delaunay(pts)
    neighbors: dict[int, set[int]] = {d: set() for d in ids}
    for simplex in tri.simplices:
        for a in simplex:
            for b in simplex:
                if a != b:
                    neighbors[ids[a]].add(ids[b])
    write_adjacency_csv(OUT / "adjacency.csv", neighbors)

    minutes = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            t = round(float(np.hypot(*(pts[i] - pts[j]))) * 0.9, 1)
            minutes[i, j] = minutes[j, i] = max(t, 5.0)
    from pdsflow.domain import DriveTimeMatrix

    write_drivetimes_csv(OUT / "drivetimes.csv", DriveTimeMatrix(tuple(ids), minutes))

    # --- census fractions with gaps ----------------------------------------
    rows: dict[int, FractionRow] = {}
    raw = {
        "rural_aay": np.clip(rng.normal(0.028, 0.009, n), 0.006, 0.07),
        "urban_aay": np.clip(rng.normal(0.014, 0.005, n), 0.002, 0.04),
        "rural_priority": rng.uniform(0.48, 0.72, n),
        "urban_priority": rng.uniform(0.30, 0.55, n),
    }
    for d in small:  # engineered overflow candidates
        raw["rural_priority"][d - 1] = 0.97
        raw["urban_priority"][d - 1] = 0.95
        raw["rural_aay"][d - 1] = 0.065
    gaps = rng.random((n, 4)) < 0.07
    for i, d in enumerate(ids):
        vals = {}
        for j, s in enumerate(SERIES):
            vals[s] = None if (gaps[i, j] and d not in small) else round(float(raw[s][i]), 4)
        rows[d] = FractionRow(**vals)
    write_fractions_csv(OUT / "fractions.csv", CensusFractionTable(rows))

    # --- state totals: rake factors ~1.15, keeps the state feasible --------
    complete = {
        s: float(
            np.sum(
                raw[s]
                * np.array(
                    [
                        d.rural_population if s.startswith("rural") else d.urban_population
                        for d in districts
                    ]
                )
            )
        )
        for s in SERIES
    }
    totals = {
        "rural_aay_households": round(complete["rural_aay"] * 1.16, 1),
        "urban_aay_households": round(complete["urban_aay"] * 1.12, 1),
        "rural_priority_persons": round(complete["rural_priority"] * 1.15, 1),
        "urban_priority_persons": round(complete["urban_priority"] * 1.10, 1),
    }
    (OUT / "state_totals.json").write_text(
        json.dumps(totals, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )

    # --- state undernourishment table (17 states around the pinned slope) --
    ratios = rng.uniform(0.04, 0.46, size=17)
    pcts = np.clip(83.67 * ratios + 2.5 + rng.normal(0, 1.4, size=17), 0.5, 60.0)
    lines = ["state,ratio,pct"]
    for k in range(17):
        lines.append(f"State{k + 1:02d},{ratios[k]:.4f},{pcts[k]:.3f}")
    (OUT / "undernourishment_states.csv").write_text("\n".join(lines) + "\n", "utf-8")

    # --- monthly storage truth, Apr 2018 .. Mar 2020 ------------------------
    lines = ["month,tonnes"]
    for year in (2018, 2019):
        for k, month in enumerate([4, 5, 6, 7, 8, 9, 10, 11, 12, 1, 2, 3]):
            y = year if month >= 4 else year + 1
            # harvest ramp Apr..Jun, then steady drawdown
            ramp = [4.9e6, 7.4e6, 8.0e6][k] if k < 3 else 8.0e6 - 0.52e6 * (k - 2)
            noise = float(rng.normal(0, 4e4))
            lines.append(f"{y:04d}-{month:02d},{round(ramp + noise, 1)}")
    (OUT / "storage_truth.csv").write_text("\n".join(lines) + "\n", "utf-8")

    # --- yields --------------------------------------------------------------
    per_rural = rng.uniform(0.16, 0.24, size=n)
    yields_kg = {
        d.id: round(d.rural_population * per_rural[i], 1) * 1000.0
        for i, d in enumerate(districts)
    }
    write_yields_csv(OUT / "yields.csv", yields_kg)

    # --- scenarios -----------------------------------------------------------
    prices = {
        "msp": 18.4,
        "msp_last_year": 17.35,
        "market_price": 20.1,
        "market_price_last_year": 19.2,
    }
    # flood zone: the 21 most north-eastern districts (largest x + y)
    order = np.argsort(pts[:, 0] + pts[:, 1])
    flooded = sorted(int(ids[i]) for i in order[-21:])
    # granaries: the five most populous districts outside the flood zone hold
    # the state's transportable surplus; everyone else starts with 25 weeks
    # of stock and drains toward the flood week, so a September-style event
    # produces a visible spike that transport then repairs.
    candidates = [d for d in districts if d.id not in flooded]
    granaries = sorted(
        d.id for d in sorted(candidates, key=lambda x: -x.total_population)[:5]
    )
    lean_params = {
        "reserve_weeks": 2,
        "transport_latency_weeks": 1,
        "state_production_total_kg": 1e6,  # negligible in-year harvest
        "initial_procured_weeks": 25,
        "initial_procured_kg": {str(g): 1.0e10 for g in granaries},
    }
    baseline = {
        "name": "baseline",
        "horizon_weeks": 52,
        "anchor_date": "2019-04-01",
        "prices": prices,
        "events": [],
        "params": lean_params,
    }
    flood = {
        "name": "flood",
        "horizon_weeks": 52,
        "anchor_date": "2019-04-01",
        "prices": prices,
        "events": [
            {
                "type": "flood",
                "week": 22,
                "district_ids": flooded,
                "destroyed_fraction": 0.75,
            }
        ],
        "params": lean_params,
    }
    # full production year (32.6 Mt harvest) for storage-curve calibration
    procurement = {
        "name": "procurement",
        "horizon_weeks": 52,
        "anchor_date": "2019-04-01",
        "prices": prices,
        "events": [],
        "params": {"last_year_procured_share": 0.2},
    }
    for name, doc in (
        ("scenario_baseline.json", baseline),
        ("scenario_flood.json", flood),
        ("scenario_procurement.json", procurement),
    ):
        (OUT / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", "utf-8")

    run_config = {
        "dataset": {"dir": "."},
        "scenario": "scenario_baseline.json",
        "output_dir": "out",
        "params": {},
    }
    (OUT / "run_config.json").write_text(
        json.dumps(run_config, indent=1, sort_keys=True) + "\n", "utf-8"
    )

    # --- sanity: the fixture must load, estimate, and simulate cleanly ------
    dataset = load_dataset(DatasetPaths.standard_layout(OUT))
    bundle, pipeline = build_bundle(dataset)
    scaled_cov = [
        e.aay_households * d.avg_family_size + e.priority_persons > d.total_population
        for e, d in zip(pipeline.scaled, sorted(dataset.districts, key=lambda x: x.id))
    ]
    n_over = sum(scaled_cov)
    assert n_over >= 2, f"want >=2 overflowing districts pre-cap, got {n_over}"
    import dataclasses

    from pdsflow.calibration import YearMode, depletion_rate_from_year

    rate = depletion_rate_from_year(dataset.storage_truth, YearMode.PRIOR_YEAR, 2019)
    bundle = dataclasses.replace(bundle, state_depletion_rate_kg_per_week=rate)
    traces = {}
    for doc in (baseline, flood, procurement):
        spec = spec_from_dict(doc)
        traces[doc["name"]] = trace = run(spec, bundle)
        worst = max(trace.mass_balance_error(w) for w in range(trace.horizon))
        assert worst <= 1e-9, worst
    # the shipped flood must spike at week 22 and recover within 4 weeks
    ft = traces["flood"]
    spikes = recoveries = 0
    for d in flooded:
        pct = ft.series("pct_undernourished", d)
        base = ft.baseline_pct[d]
        if pct[22] > base + 1.0:
            spikes += 1
            if abs(pct[26] - base) < 0.5:
                recoveries += 1
    assert spikes == 21 and recoveries == 21, (spikes, recoveries)
    for d in ft.district_ids:
        if d not in flooded:
            dev = max(abs(ft.series("pct_undernourished", d) - ft.baseline_pct[d]))
            assert dev < 0.5, (d, dev)
    print(
        f"fixture written to {OUT} ({n_over} districts overflow pre-cap; "
        f"flood spikes {spikes}/21, recovers {recoveries}/21)"
    )


if __name__ == "__main__":
    main()
