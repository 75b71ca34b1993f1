"""Dataset ingestion and result serialization.

Tabular inputs are UTF-8 comma CSVs with a header row; masses cross this
boundary in tonnes and are converted to kg (x1000) on load. Scenario and
run configuration documents are JSON. All emitted files are byte
deterministic: fixed ordering, shortest round-trip decimals.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import MonthlySeries
from .demand import UndernourishmentModel, intercept_for_slope
from .domain import (
    KG_PER_TONNE,
    CardholderEstimate,
    DistrictRecord,
    DriveTimeMatrix,
    ValidationReport,
    Violation,
    validate_dataset,
)
from .errors import IoError, ParseError, ValidationFailed
from .rations import (
    SERIES,
    AdjacencyList,
    CensusFractionTable,
    FractionRow,
    PipelineResult,
    SeriesMap,
    StateTotals,
    estimate_pipeline,
)
from .scenario import TRACE_METRICS, SimBundle, SimulationTrace


def _fmt(value: float) -> str:
    """Shortest round-trip decimal for a float; integers stay bare."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def _read_rows(path: Path, required: list[str]) -> list[tuple[int, dict[str, str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), 0, None, f"cannot read file: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    for col in required:
        if col not in header:
            raise ParseError(str(path), 1, col, "missing required column")
    return [(i + 2, row) for i, row in enumerate(reader)]


def _cell_float(path: Path, line: int, col: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ParseError(str(path), line, col, f"not a number: {raw!r}") from exc


def _cell_int(path: Path, line: int, col: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(str(path), line, col, f"not an integer: {raw!r}") from exc


def load_districts_csv(path: Path) -> list[DistrictRecord]:
    cols = ["id", "name", "total_pop", "rural_pop", "urban_pop", "avg_family_size"]
    out = []
    for line, row in _read_rows(path, cols):
        out.append(
            DistrictRecord(
                id=_cell_int(path, line, "id", row["id"]),
                name=row["name"],
                total_population=_cell_int(path, line, "total_pop", row["total_pop"]),
                rural_population=_cell_int(path, line, "rural_pop", row["rural_pop"]),
                urban_population=_cell_int(path, line, "urban_pop", row["urban_pop"]),
                avg_family_size=_cell_float(
                    path, line, "avg_family_size", row["avg_family_size"]
                ),
            )
        )
    return out


def write_districts_csv(path: Path, districts: list[DistrictRecord]) -> None:
    rows = ["id,name,total_pop,rural_pop,urban_pop,avg_family_size"]
    for d in sorted(districts, key=lambda x: x.id):
        rows.append(
            f"{d.id},{d.name},{d.total_population},{d.rural_population},"
            f"{d.urban_population},{_fmt(d.avg_family_size)}"
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_fractions_csv(path: Path) -> CensusFractionTable:
    cols = ["id", "rural_aay", "urban_aay", "rural_priority", "urban_priority"]
    rows: dict[int, FractionRow] = {}
    for line, row in _read_rows(path, cols):
        vals: dict[str, float | None] = {}
        for s in SERIES:
            raw = (row[s] or "").strip()
            vals[s] = None if raw == "" else _cell_float(path, line, s, raw)
        rows[_cell_int(path, line, "id", row["id"])] = FractionRow(**vals)
    return CensusFractionTable(rows)


def write_fractions_csv(path: Path, table: CensusFractionTable) -> None:
    rows = ["id,rural_aay,urban_aay,rural_priority,urban_priority"]
    for d in sorted(table.rows):
        r = table.rows[d]
        cells = [
            "" if getattr(r, s) is None else _fmt(getattr(r, s)) for s in SERIES
        ]
        rows.append(f"{d}," + ",".join(cells))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_adjacency_csv(path: Path) -> dict[int, set[int]]:
    """Undirected edge list; returns the symmetric closure."""
    edges: dict[int, set[int]] = {}
    for line, row in _read_rows(path, ["id", "neighbor_id"]):
        a = _cell_int(path, line, "id", row["id"])
        b = _cell_int(path, line, "neighbor_id", row["neighbor_id"])
        edges.setdefault(a, set()).add(b)
        edges.setdefault(b, set()).add(a)
    return edges


def write_adjacency_csv(path: Path, neighbors: dict[int, set[int]]) -> None:
    rows = ["id,neighbor_id"]
    for a in sorted(neighbors):
        for b in sorted(neighbors[a]):
            if a < b:
                rows.append(f"{a},{b}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_drivetimes_csv(path: Path) -> DriveTimeMatrix:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), 0, None, f"cannot read file: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(str(path), 1, None, "empty drive-time matrix")
    header = lines[0].split(",")
    if header[0] != "id":
        raise ParseError(str(path), 1, "id", "matrix header must start with 'id'")
    ids = [_cell_int(path, 1, c, c) for c in header[1:]]
    n = len(ids)
    minutes = np.zeros((n, n))
    if len(lines) - 1 != n:
        raise ParseError(
            str(path), len(lines), None, f"expected {n} matrix rows, got {len(lines) - 1}"
        )
    for i, ln in enumerate(lines[1:]):
        cells = ln.split(",")
        if len(cells) != n + 1:
            raise ParseError(str(path), i + 2, None, f"expected {n + 1} cells")
        row_id = _cell_int(path, i + 2, "id", cells[0])
        if row_id != ids[i]:
            raise ParseError(
                str(path), i + 2, "id", f"row id {row_id} does not match header {ids[i]}"
            )
        for j, raw in enumerate(cells[1:]):
            minutes[i, j] = _cell_float(path, i + 2, header[j + 1], raw)
    return DriveTimeMatrix(tuple(ids), minutes)


def write_drivetimes_csv(path: Path, matrix: DriveTimeMatrix) -> None:
    ids = matrix.district_ids
    rows = ["id," + ",".join(str(d) for d in ids)]
    for i, d in enumerate(ids):
        rows.append(
            f"{d}," + ",".join(_fmt(float(matrix.minutes[i, j])) for j in range(len(ids)))
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_state_totals_json(path: Path) -> StateTotals:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(str(path), 0, None, f"cannot read file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, exc.colno, exc.msg) from exc
    try:
        return StateTotals(
            rural_aay_households=float(obj["rural_aay_households"]),
            rural_priority_persons=float(obj["rural_priority_persons"]),
            urban_aay_households=float(obj["urban_aay_households"]),
            urban_priority_persons=float(obj["urban_priority_persons"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(str(path), 0, None, f"bad state totals: {exc}") from exc


def load_undernourishment_csv(path: Path) -> list[tuple[str, float, float]]:
    out = []
    for line, row in _read_rows(path, ["state", "ratio", "pct"]):
        out.append(
            (
                row["state"],
                _cell_float(path, line, "ratio", row["ratio"]),
                _cell_float(path, line, "pct", row["pct"]),
            )
        )
    return out


def load_storage_truth_csv(path: Path) -> MonthlySeries:
    """Monthly state storage; tonnes on disk, kg in memory."""
    out = []
    for line, row in _read_rows(path, ["month", "tonnes"]):
        month = row["month"].strip()
        if len(month) != 7 or month[4] != "-":
            raise ParseError(str(path), line, "month", f"expected YYYY-MM, got {month!r}")
        out.append((month, _cell_float(path, line, "tonnes", row["tonnes"]) * KG_PER_TONNE))
    return sorted(out)


def load_yields_csv(path: Path) -> dict[int, float]:
    """Per-district produced wheat; tonnes on disk, kg in memory."""
    out: dict[int, float] = {}
    for line, row in _read_rows(path, ["id", "produced_tonnes"]):
        d = _cell_int(path, line, "id", row["id"])
        out[d] = _cell_float(path, line, "produced_tonnes", row["produced_tonnes"]) * KG_PER_TONNE
    return out


def write_yields_csv(path: Path, yields_kg: dict[int, float]) -> None:
    rows = ["id,produced_tonnes"]
    for d in sorted(yields_kg):
        rows.append(f"{d},{_fmt(yields_kg[d] / KG_PER_TONNE)}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class DatasetPaths:
    districts: Path
    fractions: Path
    adjacency: Path
    drivetimes: Path
    state_totals: Path
    undernourishment_states: Path
    storage_truth: Path
    yields: Path

    @classmethod
    def standard_layout(cls, root: Path) -> "DatasetPaths":
        return cls(
            districts=root / "districts.csv",
            fractions=root / "fractions.csv",
            adjacency=root / "adjacency.csv",
            drivetimes=root / "drivetimes.csv",
            state_totals=root / "state_totals.json",
            undernourishment_states=root / "undernourishment_states.csv",
            storage_truth=root / "storage_truth.csv",
            yields=root / "yields.csv",
        )

    def all_files(self) -> list[Path]:
        return [
            self.districts,
            self.fractions,
            self.adjacency,
            self.drivetimes,
            self.state_totals,
            self.undernourishment_states,
            self.storage_truth,
            self.yields,
        ]


@dataclass(frozen=True)
class Dataset:
    """Validated input bundle, cross-referenced by district id."""

    districts: list[DistrictRecord]
    fractions: CensusFractionTable
    adjacency: AdjacencyList
    drive_times: DriveTimeMatrix
    state_totals: StateTotals
    undernourishment_table: list[tuple[str, float, float]]
    storage_truth: MonthlySeries
    yields_kg: dict[int, float]
    fingerprint: str = ""


def _fingerprint(paths: DatasetPaths) -> str:
    h = hashlib.sha256()
    for p in paths.all_files():
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def load_dataset(paths: DatasetPaths) -> Dataset:
    """Parse and cross-validate all input files.

    Raises ParseError at the first malformed cell and ValidationFailed with
    the full report when any structural invariant is broken.
    """
    districts = load_districts_csv(paths.districts)
    fractions = load_fractions_csv(paths.fractions)
    adjacency_raw = load_adjacency_csv(paths.adjacency)
    matrix = load_drivetimes_csv(paths.drivetimes)
    totals = load_state_totals_json(paths.state_totals)
    undernourishment = load_undernourishment_csv(paths.undernourishment_states)
    storage = load_storage_truth_csv(paths.storage_truth)
    yields_kg = load_yields_csv(paths.yields)

    report = validate_dataset(districts, matrix)
    extra: list[Violation] = list(report.violations)
    ids = {d.id for d in districts}
    for a, nbs in sorted(adjacency_raw.items()):
        if a not in ids:
            extra.append(Violation(a, "adjacency", "district id not in districts.csv"))
        if a in nbs:
            extra.append(Violation(a, "adjacency", "self-loop"))
    for f_id in sorted(fractions.rows):
        if f_id not in ids:
            extra.append(Violation(f_id, "fractions", "district id not in districts.csv"))
    for y_id in sorted(yields_kg):
        if y_id not in ids:
            extra.append(Violation(y_id, "yields", "district id not in districts.csv"))
    if extra:
        raise ValidationFailed(ValidationReport(tuple(extra)))

    adjacency = AdjacencyList(
        {d.id: frozenset(adjacency_raw.get(d.id, set())) for d in districts}
    )
    if not adjacency.is_connected():
        raise ValidationFailed(
            ValidationReport(
                (Violation(None, "adjacency", "district graph is not connected"),)
            )
        )
    return Dataset(
        districts=districts,
        fractions=fractions,
        adjacency=adjacency,
        drive_times=matrix,
        state_totals=totals,
        undernourishment_table=undernourishment,
        storage_truth=storage,
        yields_kg=yields_kg,
        fingerprint=_fingerprint(paths),
    )


def build_bundle(
    dataset: Dataset,
    slope: float = 83.67,
    intercept: float | None = None,
    spike_gain: float = 1.0,
    depletion_rate_kg_per_week: float | None = None,
    scale_urban: bool = True,
) -> tuple[SimBundle, PipelineResult]:
    """Assemble run inputs: ration pipeline plus the undernourishment model.

    With ``intercept=None`` the intercept is fitted from the state table
    with the slope pinned, so runs are reproducible against the published
    slope while still passing through the supplied ground truth.
    """
    pipeline = estimate_pipeline(
        dataset.fractions,
        dataset.districts,
        dataset.adjacency,
        dataset.state_totals,
        scale_urban=scale_urban,
    )
    if intercept is None:
        points = [(r, p) for _, r, p in dataset.undernourishment_table]
        intercept = intercept_for_slope(points, slope) if points else 0.0
    model = UndernourishmentModel(slope=slope, intercept=intercept, spike_gain=spike_gain)
    bundle = SimBundle(
        districts=dataset.districts,
        cardholders=pipeline.capped,
        drive_times=dataset.drive_times,
        yields_kg=dataset.yields_kg,
        undernourishment=model,
        state_depletion_rate_kg_per_week=depletion_rate_kg_per_week,
    )
    return bundle, pipeline


def write_estimates_csv(path: Path, estimates: list[CardholderEstimate]) -> None:
    """CardholderEstimate rows (scaled/capped stages) with a stage column."""
    rows = ["district_id,aay_households,priority_persons,stage"]
    ordered = sorted(estimates, key=lambda e: (e.stage.value, e.district_id))
    for e in ordered:
        rows.append(
            f"{e.district_id},{_fmt(e.aay_households)},{_fmt(e.priority_persons)},{e.stage.value}"
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_series_table_csv(path: Path, table: dict[str, SeriesMap]) -> None:
    """Four-series stage table (raw/imputed); blank cells mark missing."""
    rows = ["id," + ",".join(SERIES)]
    for d in sorted(table[SERIES[0]]):
        cells = []
        for s in SERIES:
            v = table[s][d]
            cells.append("" if v is None else _fmt(float(v)))
        rows.append(f"{d}," + ",".join(cells))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def trace_csv_text(trace: SimulationTrace) -> str:
    """Long-format trace: week,district_id,metric,value; stable order."""
    lines = ["week,district_id,metric,value"]
    for w in range(trace.horizon):
        for i, d in enumerate(trace.district_ids):
            for m in TRACE_METRICS:
                lines.append(f"{w},{d},{m},{_fmt(float(trace.metrics[m][w, i]))}")
    return "\n".join(lines) + "\n"


def trace_json_obj(trace: SimulationTrace) -> dict:
    return {
        "scenario": trace.scenario_name,
        "horizon_weeks": trace.horizon,
        "anchor_date": trace.anchor.isoformat(),
        "district_ids": list(trace.district_ids),
        "baseline_pct": {str(d): trace.baseline_pct[d] for d in trace.district_ids},
        "initial_mass_kg": trace.initial_mass_kg,
        "in_flight_kg": [float(v) for v in trace.in_flight_kg],
        "destroyed_kg": [float(v) for v in trace.destroyed_kg],
        "metrics": {
            m: [[float(v) for v in row] for row in trace.metrics[m]]
            for m in TRACE_METRICS
        },
    }


def emit_trace(trace: SimulationTrace, fmt: str, out_dir: Path) -> list[Path]:
    """Write the trace in csv_long and/or json form; byte deterministic."""
    if fmt not in ("csv_long", "json", "both"):
        raise IoError(f"unknown trace format {fmt!r}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt in ("csv_long", "both"):
            p = out_dir / f"{trace.scenario_name}_trace.csv"
            p.write_text(trace_csv_text(trace), encoding="utf-8")
            written.append(p)
        if fmt in ("json", "both"):
            p = out_dir / f"{trace.scenario_name}_trace.json"
            p.write_text(
                json.dumps(trace_json_obj(trace), sort_keys=True, indent=1) + "\n",
                encoding="utf-8",
            )
            written.append(p)
        return written
    except OSError as exc:
        raise IoError(f"cannot write trace: {exc}") from exc


def read_trace_csv(path: Path) -> dict[tuple[int, int, str], float]:
    """Inverse of trace_csv_text, keyed by (week, district, metric)."""
    out = {}
    for line, row in _read_rows(path, ["week", "district_id", "metric", "value"]):
        key = (
            _cell_int(path, line, "week", row["week"]),
            _cell_int(path, line, "district_id", row["district_id"]),
            row["metric"],
        )
        out[key] = _cell_float(path, line, "value", row["value"])
    return out
