"""HTTP facade over scenario runs for the what-if dashboard.

Runs are content addressed: the run id hashes the dataset fingerprint and
the canonical scenario document, so identical requests dedupe and a
restarted service replays the same responses from its cache directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .calibration import YearMode, depletion_rate_from_year
from .dataio import Dataset, build_bundle, trace_json_obj
from .demand import baseline_undernourished
from .errors import MissingYear, PdsflowError, SpecError, UnknownDistrict, ValidationFailed
from .scenario import TRACE_METRICS, run, spec_from_dict, spec_to_dict

_DEPLETION_MODES = {
    "prior_year": YearMode.PRIOR_YEAR,
    "same_year": YearMode.SAME_YEAR,
    "multi_year": YearMode.MULTI_YEAR_AVERAGE,
}


class RunCache:
    """Memory map of finished runs, mirrored to disk when a directory is set."""

    def __init__(self, cache_dir: Path | None):
        self.cache_dir = cache_dir
        self._mem: dict[str, dict] = {}
        self._lock = threading.Lock()
        if cache_dir is not None:
            cache_dir.mkdir(parents=True, exist_ok=True)

    def get(self, run_id: str) -> dict | None:
        with self._lock:
            if run_id in self._mem:
                return self._mem[run_id]
        if self.cache_dir is not None:
            p = self.cache_dir / f"{run_id}.json"
            if p.exists():
                obj = json.loads(p.read_text(encoding="utf-8"))
                with self._lock:
                    self._mem[run_id] = obj
                return obj
        return None

    def put(self, run_id: str, obj: dict) -> None:
        with self._lock:
            self._mem[run_id] = obj
        if self.cache_dir is not None:
            # write-temp-then-rename keeps concurrent readers consistent
            fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    json.dump(obj, fh, sort_keys=True)
                os.replace(tmp, self.cache_dir / f"{run_id}.json")
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise

    def run_ids(self) -> list[str]:
        with self._lock:
            ids = set(self._mem)
        if self.cache_dir is not None:
            ids.update(p.stem for p in self.cache_dir.glob("*.json"))
        return sorted(ids)


def create_app(
    dataset: Dataset,
    params: dict | None = None,
    cache_dir: Path | None = None,
    static_dir: Path | None = None,
    max_workers: int = 4,
) -> FastAPI:
    params = dict(params or {})
    if not dataset.districts:
        raise ValidationFailed("dataset has no districts")

    base_bundle, pipeline = build_bundle(
        dataset,
        slope=float(params.get("slope", 83.67)),
        intercept=params.get("intercept"),
        spike_gain=float(params.get("spike_gain", 1.0)),
        depletion_rate_kg_per_week=None,
        scale_urban=bool(params.get("scale_urban", True)),
    )
    known_ids = {d.id for d in dataset.districts}
    estimates = {e.district_id: e for e in pipeline.capped}
    baselines = {
        d: baseline_undernourished(estimates[d], base_bundle.undernourishment)
        for d in sorted(known_ids)
    }
    depletion_mode = params.get("depletion_mode", "prior_year")
    explicit_rate = params.get("depletion_rate_kg_per_week")
    rate_by_year: dict[int, float | None] = {}

    def rate_for(anchor_year: int) -> float | None:
        if explicit_rate is not None:
            return float(explicit_rate)
        if depletion_mode == "none" or not dataset.storage_truth:
            return None
        if anchor_year not in rate_by_year:
            try:
                rate_by_year[anchor_year] = depletion_rate_from_year(
                    dataset.storage_truth,
                    _DEPLETION_MODES[depletion_mode],
                    anchor_year,
                )
            except MissingYear:
                rate_by_year[anchor_year] = None
        return rate_by_year[anchor_year]

    cache = RunCache(cache_dir)
    workers = threading.Semaphore(max_workers)

    app = FastAPI(title="pdsflow", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/districts")
    def districts():
        out = []
        for d in sorted(dataset.districts, key=lambda x: x.id):
            e = estimates[d.id]
            out.append(
                {
                    "id": d.id,
                    "name": d.name,
                    "total_population": d.total_population,
                    "rural_population": d.rural_population,
                    "urban_population": d.urban_population,
                    "avg_family_size": d.avg_family_size,
                    "aay_households": e.aay_households,
                    "priority_persons": e.priority_persons,
                    "baseline_pct_undernourished": baselines[d.id],
                }
            )
        return {"districts": out, "dataset_fingerprint": dataset.fingerprint}

    @app.get("/api/storage-truth")
    def storage_truth():
        return {
            "series": [
                {"month": month, "kg": kg} for month, kg in dataset.storage_truth
            ]
        }

    @app.get("/api/runs")
    def list_runs():
        runs = []
        for run_id in cache.run_ids():
            obj = cache.get(run_id)
            if obj is not None:
                runs.append({"run_id": run_id, "scenario": obj["trace"]["scenario"]})
        return {"runs": runs}

    @app.post("/api/runs")
    def submit_run(payload: dict = Body(...)):
        try:
            spec = spec_from_dict(payload)
        except SpecError as err:
            raise HTTPException(status_code=400, detail=str(err))
        try:
            spec.validate_districts(known_ids)
        except UnknownDistrict as err:
            raise HTTPException(status_code=422, detail=str(err))

        canonical = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
        run_id = hashlib.sha256(
            (dataset.fingerprint + "|" + canonical).encode()
        ).hexdigest()[:16]
        if cache.get(run_id) is not None:
            return {"run_id": run_id, "cached": True}

        bundle = dataclasses.replace(
            base_bundle, state_depletion_rate_kg_per_week=rate_for(spec.anchor.year)
        )
        with workers:
            try:
                trace = run(spec, bundle)
            except UnknownDistrict as err:
                raise HTTPException(status_code=422, detail=str(err))
            except PdsflowError as err:
                raise HTTPException(status_code=500, detail=str(err))
        cache.put(run_id, {"spec": spec_to_dict(spec), "trace": trace_json_obj(trace)})
        return {"run_id": run_id, "cached": False}

    @app.get("/api/runs/{run_id}/trace")
    def get_trace(run_id: str, district: str | None = None, metric: str | None = None):
        obj = cache.get(run_id)
        if obj is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        trace = obj["trace"]
        ids: list[int] = trace["district_ids"]
        metrics = list(TRACE_METRICS)
        if metric is not None:
            if metric not in TRACE_METRICS:
                raise HTTPException(status_code=400, detail=f"unknown metric {metric!r}")
            metrics = [metric]
        cols = range(len(ids))
        if district is not None:
            try:
                want = int(district)
            except ValueError:
                raise HTTPException(status_code=400, detail="district must be an integer id")
            if want not in ids:
                raise HTTPException(status_code=400, detail=f"district {want} not in dataset")
            cols = [ids.index(want)]
        series = {
            m: {
                str(ids[c]): [row[c] for row in trace["metrics"][m]] for c in cols
            }
            for m in metrics
        }
        return {
            "run_id": run_id,
            "scenario": trace["scenario"],
            "horizon_weeks": trace["horizon_weeks"],
            "anchor_date": trace["anchor_date"],
            "weeks": list(range(trace["horizon_weeks"])),
            "baseline_pct": trace["baseline_pct"],
            "series": series,
        }

    if static_dir is not None and static_dir.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
