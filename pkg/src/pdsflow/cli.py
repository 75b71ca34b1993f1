"""Command-line interface.

Exit codes: 0 success, 2 validation failure (bad dataset, bad scenario,
unknown district), 3 runtime error during estimation or simulation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .calibration import (
    YearMode,
    aggregate_to_state_monthly,
    compare_series,
    depletion_rate_from_year,
)
from .dataio import (
    Dataset,
    DatasetPaths,
    build_bundle,
    emit_trace,
    load_dataset,
    write_estimates_csv,
    write_series_table_csv,
)
from .errors import (
    ParseError,
    PdsflowError,
    SpecError,
    UnknownDistrict,
    ValidationFailed,
)
from .scenario import ScenarioSpec, run, spec_from_json

_VALIDATION_ERRORS = (ValidationFailed, ParseError, SpecError, UnknownDistrict)

_DEPLETION_MODES = {
    "prior_year": YearMode.PRIOR_YEAR,
    "same_year": YearMode.SAME_YEAR,
    "multi_year": YearMode.MULTI_YEAR_AVERAGE,
}


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument(
        "--dataset-dir", "--dataset",
        type=Path,
        dest="dataset_dir",
        help="directory with the standard file layout",
    )
    g.add_argument("--config", type=Path, help="run-configuration JSON")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--slope", type=float, default=None, help="undernourishment slope (default 83.67)")
    p.add_argument("--intercept", type=float, default=None, help="pin the intercept (default: fit from state table)")
    p.add_argument("--spike-gain", type=float, default=None)
    p.add_argument(
        "--depletion-mode",
        choices=sorted(_DEPLETION_MODES) + ["none"],
        default=None,
        help="how to derive the state depletion rate from storage truth (default prior_year)",
    )
    p.add_argument("--depletion-rate", type=float, default=None, help="explicit kg/week, overrides the mode")
    p.add_argument("--no-scale-urban", action="store_true", help="leave urban card series unscaled")


@dataclasses.dataclass
class RunContext:
    dataset: Dataset
    params: dict
    output_dir: Path
    scenario_path: Path | None


def _load_context(args) -> RunContext:
    params: dict = {}
    scenario_path = getattr(args, "scenario", None)
    output_dir = Path(getattr(args, "out", None) or "out")
    if args.config:
        try:
            doc = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(str(args.config), 0, None, f"cannot read config: {exc}")
        except json.JSONDecodeError as exc:
            raise ParseError(str(args.config), exc.lineno, exc.colno, exc.msg)
        base = args.config.parent
        ds = doc.get("dataset", {})
        if "dir" in ds:
            paths = DatasetPaths.standard_layout((base / ds["dir"]).resolve())
        else:
            try:
                paths = DatasetPaths(
                    **{k: (base / v).resolve() for k, v in ds.items()}
                )
            except TypeError as exc:
                raise SpecError(f"bad dataset paths in config: {exc}") from exc
        params = dict(doc.get("params", {}))
        if scenario_path is None and doc.get("scenario"):
            scenario_path = base / doc["scenario"]
        if getattr(args, "out", None) is None and doc.get("output_dir"):
            output_dir = base / doc["output_dir"]
    else:
        paths = DatasetPaths.standard_layout(args.dataset_dir)
    dataset = load_dataset(paths)

    # CLI flags override config params
    for key, flag in (
        ("slope", "slope"),
        ("intercept", "intercept"),
        ("spike_gain", "spike_gain"),
        ("depletion_mode", "depletion_mode"),
        ("depletion_rate_kg_per_week", "depletion_rate"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            params[key] = v
    if getattr(args, "no_scale_urban", False):
        params["scale_urban"] = False
    return RunContext(dataset, params, output_dir, scenario_path)


def _resolve_depletion_rate(ctx: RunContext, spec: ScenarioSpec) -> float | None:
    if ctx.params.get("depletion_rate_kg_per_week") is not None:
        return float(ctx.params["depletion_rate_kg_per_week"])
    mode = ctx.params.get("depletion_mode", "prior_year")
    if mode == "none" or not ctx.dataset.storage_truth:
        return None
    return depletion_rate_from_year(
        ctx.dataset.storage_truth, _DEPLETION_MODES[mode], spec.anchor.year
    )


def _bundle_for(ctx: RunContext, spec: ScenarioSpec | None):
    rate = None if spec is None else _resolve_depletion_rate(ctx, spec)
    bundle, pipeline = build_bundle(
        ctx.dataset,
        slope=float(ctx.params.get("slope", 83.67)),
        intercept=ctx.params.get("intercept"),
        spike_gain=float(ctx.params.get("spike_gain", 1.0)),
        depletion_rate_kg_per_week=rate,
        scale_urban=bool(ctx.params.get("scale_urban", True)),
    )
    return bundle, pipeline


def _read_spec(path: Path) -> ScenarioSpec:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), 0, None, f"cannot read scenario: {exc}")
    spec = spec_from_json(text)
    return dataclasses.replace(spec, name=path.stem)


def cmd_validate(args) -> int:
    try:
        ctx = _load_context(args)
    except ValidationFailed as err:
        print(err.report, file=sys.stderr)
        return 2
    print(f"dataset valid: {len(ctx.dataset.districts)} districts "
          f"(fingerprint {ctx.dataset.fingerprint[:12]})")
    return 0


def cmd_estimate_rations(args) -> int:
    ctx = _load_context(args)
    _, pipeline = _bundle_for(ctx, None)
    out = ctx.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_series_table_csv(out / "rations_raw.csv", pipeline.raw)
    write_series_table_csv(out / "rations_imputed.csv", pipeline.imputed)
    write_estimates_csv(out / "rations_estimates.csv", pipeline.scaled + pipeline.capped)
    aay = sum(e.aay_households for e in pipeline.capped)
    pri = sum(e.priority_persons for e in pipeline.capped)
    print(f"wrote {out}/rations_*.csv  (state AAY households {aay:,.0f}, "
          f"Priority persons {pri:,.0f})")
    return 0


def _simulate_one(ctx: RunContext, path: Path, fmt: str) -> list[Path]:
    spec = _read_spec(path)
    spec.validate_districts({d.id for d in ctx.dataset.districts})
    bundle, _ = _bundle_for(ctx, spec)
    trace = run(spec, bundle)
    return emit_trace(trace, fmt, ctx.output_dir)


def cmd_simulate(args) -> int:
    ctx = _load_context(args)
    fmt = args.format
    if args.batch:
        scenario_files = sorted(Path(args.batch).glob("*.json"))
        if not scenario_files:
            raise SpecError(f"no scenario files in {args.batch}")
        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = [
                pool.submit(_simulate_one, ctx, p, fmt) for p in scenario_files
            ]
            for fut in futures:
                for written in fut.result():
                    print(written)
        return 0
    if ctx.scenario_path is None:
        raise SpecError("simulate needs --scenario FILE or --batch DIR (or a config with one)")
    for written in _simulate_one(ctx, ctx.scenario_path, fmt):
        print(written)
    return 0


def cmd_calibrate(args) -> int:
    ctx = _load_context(args)
    if ctx.scenario_path is None:
        raise SpecError("calibrate needs --scenario FILE (or a config with one)")
    spec = _read_spec(ctx.scenario_path)
    bundle, _ = _bundle_for(ctx, spec)
    trace = run(spec, bundle)
    model = dict(aggregate_to_state_monthly(trace))
    truth = dict(ctx.dataset.storage_truth)
    months = sorted(set(model) & set(truth))
    comparison = compare_series([model[m] for m in months], [truth[m] for m in months])
    out = ctx.output_dir
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{spec.name}_calibration.csv"
    lines = ["month,model_kg,truth_kg"]
    for m in months:
        lines.append(f"{m},{model[m]!r},{truth[m]!r}")
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    truth_mean = sum(truth[m] for m in months) / len(months)
    metrics = {
        "months": months,
        "month_boundary": "last simulated week whose start date falls in the month",
        "rmse_kg": comparison.rmse,
        "rmse_pct_of_truth": 100.0 * comparison.rmse / truth_mean,
        "mape_pct": comparison.mape,
        "pearson_r": comparison.pearson_r,
    }
    json_path = out / f"{spec.name}_calibration.json"
    json_path.write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n", "utf-8")
    print(f"{csv_path}\n{json_path}")
    print(
        f"rmse {comparison.rmse:,.0f} kg | mape {comparison.mape:.1f}% | "
        f"r {comparison.pearson_r:+.3f} over {len(months)} months"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ctx = _load_context(args)
    app = create_app(
        ctx.dataset,
        params=ctx.params,
        cache_dir=args.cache_dir,
        static_dir=args.static,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdsflow",
        description="Weekly district-level wheat distribution simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="lint a dataset")
    _add_dataset_args(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("estimate-rations", help="run the cardholder estimation pipeline")
    _add_dataset_args(p)
    _add_model_args(p)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(fn=cmd_estimate_rations)

    p = sub.add_parser("simulate", help="run one scenario (or a directory of them)")
    _add_dataset_args(p)
    _add_model_args(p)
    p.add_argument("--scenario", type=Path, default=None)
    p.add_argument("--batch", type=Path, default=None, help="directory of scenario JSON files")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=["csv_long", "json", "both"], default="csv_long")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("calibrate", help="compare a run against monthly storage truth")
    _add_dataset_args(p)
    _add_model_args(p)
    p.add_argument("--scenario", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("serve", help="HTTP service for the what-if dashboard")
    _add_dataset_args(p)
    _add_model_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--cache-dir", type=Path, default=None)
    p.add_argument("--static", type=Path, default=None, help="built dashboard to serve at /")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _VALIDATION_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except PdsflowError as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
