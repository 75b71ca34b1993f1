import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from pdsflow.dataio import DatasetPaths, load_dataset
from pdsflow.service import create_app

FIXTURE = Path(__file__).resolve().parents[1] / "fixtures" / "up75"


@pytest.fixture(scope="module")
def dataset():
    return load_dataset(DatasetPaths.standard_layout(FIXTURE))


@pytest.fixture()
def client(dataset, tmp_path):
    app = create_app(dataset, cache_dir=tmp_path / "runs")
    return TestClient(app)


def baseline_doc(horizon=6):
    doc = json.loads((FIXTURE / "scenario_baseline.json").read_text())
    doc["horizon_weeks"] = horizon
    return doc


def flood_doc(horizon=28):
    doc = json.loads((FIXTURE / "scenario_flood.json").read_text())
    doc["horizon_weeks"] = horizon
    return doc


class TestSubmitRun:
    def test_happy_path_and_dedupe(self, client):
        r1 = client.post("/api/runs", json=baseline_doc())
        assert r1.status_code == 200
        run_id = r1.json()["run_id"]
        assert r1.json()["cached"] is False
        r2 = client.post("/api/runs", json=baseline_doc())
        assert r2.status_code == 200
        assert r2.json() == {"run_id": run_id, "cached": True}

    def test_invalid_spec_400(self, client):
        r = client.post("/api/runs", json={"prices": {"msp": 1.0}})
        assert r.status_code == 400
        doc = baseline_doc()
        doc["events"] = [{"type": "flood", "week": 2, "district_ids": [1], "destroyed_fraction": 7.0}]
        assert client.post("/api/runs", json=doc).status_code == 400

    def test_unknown_district_422_names_it(self, client):
        doc = flood_doc()
        doc["events"][0]["district_ids"] = [31337]
        r = client.post("/api/runs", json=doc)
        assert r.status_code == 422
        assert "31337" in r.json()["detail"]

    def test_runs_listed(self, client):
        client.post("/api/runs", json=baseline_doc())
        runs = client.get("/api/runs").json()["runs"]
        assert len(runs) == 1
        assert runs[0]["scenario"] == "baseline"


class TestTraceEndpoint:
    def test_full_metric_slice_has_all_districts(self, client):
        run_id = client.post("/api/runs", json=baseline_doc()).json()["run_id"]
        r = client.get(f"/api/runs/{run_id}/trace", params={"metric": "pct_undernourished"})
        assert r.status_code == 200
        body = r.json()
        series = body["series"]["pct_undernourished"]
        assert len(series) == 75
        assert all(len(v) == 6 for v in series.values())
        assert body["weeks"] == list(range(6))

    def test_unknown_run_404(self, client):
        assert client.get("/api/runs/deadbeef/trace").status_code == 404

    def test_district_filter_single_series(self, client):
        run_id = client.post("/api/runs", json=baseline_doc()).json()["run_id"]
        r = client.get(
            f"/api/runs/{run_id}/trace",
            params={"metric": "procured_storage", "district": "40"},
        )
        assert r.status_code == 200
        assert list(r.json()["series"]["procured_storage"].keys()) == ["40"]

    def test_bad_filters_400(self, client):
        run_id = client.post("/api/runs", json=baseline_doc()).json()["run_id"]
        assert client.get(f"/api/runs/{run_id}/trace", params={"metric": "nope"}).status_code == 400
        assert client.get(f"/api/runs/{run_id}/trace", params={"district": "x"}).status_code == 400
        assert client.get(f"/api/runs/{run_id}/trace", params={"district": "999"}).status_code == 400


def test_storage_truth_served_in_kg(client, dataset):
    r = client.get("/api/storage-truth")
    assert r.status_code == 200
    series = r.json()["series"]
    assert len(series) == len(dataset.storage_truth)
    assert series[0]["month"] == dataset.storage_truth[0][0]
    assert series[0]["kg"] == dataset.storage_truth[0][1]


class TestDistrictsEndpoint:
    def test_records_match_dataset(self, client, dataset):
        r = client.get("/api/districts")
        assert r.status_code == 200
        body = r.json()
        assert len(body["districts"]) == 75
        first = body["districts"][0]
        d = sorted(dataset.districts, key=lambda x: x.id)[0]
        assert first["id"] == d.id
        assert first["name"] == d.name
        assert first["total_population"] == d.total_population
        assert first["rural_population"] + first["urban_population"] == first["total_population"]
        assert 0.0 <= first["baseline_pct_undernourished"] <= 100.0
        assert first["aay_households"] > 0


class TestCacheReplay:
    def test_restart_replays_identical_responses(self, dataset, tmp_path):
        cache = tmp_path / "runs"
        app1 = create_app(dataset, cache_dir=cache)
        c1 = TestClient(app1)
        run_id = c1.post("/api/runs", json=flood_doc()).json()["run_id"]
        body1 = c1.get(f"/api/runs/{run_id}/trace", params={"metric": "unmet_kg"}).json()

        app2 = create_app(dataset, cache_dir=cache)  # fresh process, same disk
        c2 = TestClient(app2)
        r = c2.post("/api/runs", json=flood_doc())
        assert r.json() == {"run_id": run_id, "cached": True}
        body2 = c2.get(f"/api/runs/{run_id}/trace", params={"metric": "unmet_kg"}).json()
        assert body1 == body2

    def test_flood_spike_visible_in_trace(self, client):
        doc = flood_doc(horizon=28)
        run_id = client.post("/api/runs", json=doc).json()["run_id"]
        body = client.get(
            f"/api/runs/{run_id}/trace", params={"metric": "pct_undernourished"}
        ).json()
        flooded = doc["events"][0]["district_ids"]
        for d in flooded:
            series = body["series"]["pct_undernourished"][str(d)]
            base = body["baseline_pct"][str(d)]
            assert series[22] > base + 1.0  # spike at the event week
            assert abs(series[26] - base) < 0.5  # restored shortly after
