"""Batch front end: many independent series in, files out.

Input CSVs hold one observation per row; one or more ID columns split the
file into independent series, each fitted by its own pipeline on a worker
pool.  A failure in one series is recorded in ``errors.csv`` and never
blocks the rest of the batch.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Optional

import numpy as np

from . import pipeline as pl
from . import xreg as xr
from .config import RunConfig, config_from_mapping, load_config, with_overrides
from .errors import BatchcastError, MissingColumn, MisalignedCovariates
from .holidays import HolidaySpec, specs_from_csv
from .metrics import compute_metrics, geometric_mean_mase, mase_period
from .temporal import (
    Frequency,
    IndexBasis,
    RawSeries,
    RegularSeries,
    micros_to_datetime,
    parse_timestamp,
    regularize,
)


@dataclass
class SeriesPartition:
    """All rows of one series, in input order."""

    id_tuple: tuple
    timestamps: list
    values: list
    covariates: dict[str, list]


def partition_input(
    rows: Iterable[dict],
    id_cols: list[str],
    timestamp_col: str,
    value_col: str,
    covariate_cols: Optional[list[str]] = None,
) -> list[SeriesPartition]:
    """Group rows by their ID tuple, lexicographically ordered."""
    covariate_cols = covariate_cols or []
    partitions: dict[tuple, SeriesPartition] = {}
    for row in rows:
        for col in (*id_cols, timestamp_col, value_col, *covariate_cols):
            if col not in row:
                raise MissingColumn(f"column {col!r} missing from input")
        key = tuple(row[c] for c in id_cols)
        part = partitions.get(key)
        if part is None:
            part = SeriesPartition(key, [], [], {c: [] for c in covariate_cols})
            partitions[key] = part
        part.timestamps.append(row[timestamp_col])
        part.values.append(row[value_col])
        for c in covariate_cols:
            part.covariates[c].append(row[c])
    return [partitions[k] for k in sorted(partitions, key=lambda t: tuple(map(str, t)))]


def _read_csv(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        rows = list(reader)
        header = reader.fieldnames or []
    return header, rows


def _slot_key(series: RegularSeries, raw_timestamp) -> Optional[int]:
    """Grid slot of one raw timestamp, mirroring regularization."""
    micros = parse_timestamp(raw_timestamp)
    if micros is None:
        return None
    if series.index_basis == IndexBasis.MONTHS_SINCE_START:
        from .temporal import to_month_index

        day = micros_to_datetime(micros).date()
        if day < series.start:
            return None
        return round(to_month_index(day, series.start) / series.freq.interval)
    if series.index_basis == IndexBasis.LOCAL_MICROS_SINCE_1960:
        from .temporal import localize_timestamps

        micros = localize_timestamps([micros], series.timezone)[0]
    return round((micros - series.start) / series.freq.interval)


def _align_covariates(
    series: RegularSeries, partition: SeriesPartition
) -> dict[str, list]:
    """One covariate row per grid slot (last row in a slot wins)."""
    n = len(series.values)
    aligned = {c: [None] * n for c in partition.covariates}
    for i, ts in enumerate(partition.timestamps):
        slot = _slot_key(series, ts)
        if slot is None or not 0 <= slot < n:
            continue
        for c, vals in partition.covariates.items():
            aligned[c][slot] = vals[i]
    for c, vals in aligned.items():
        missing = sum(v is None for v in vals)
        if missing:
            raise MisalignedCovariates(
                f"covariate {c!r} missing for {missing} grid slots"
            )
    return aligned


@dataclass
class SeriesResult:
    id_tuple: tuple
    error: Optional[str] = None
    stage: Optional[str] = None
    forecast_rows: list = None
    component_rows: list = None
    anomaly_rows: list = None
    model_json: Optional[str] = None
    metric_row: Optional[dict] = None


def _format_timestamp(ts) -> str:
    if isinstance(ts, date):
        return ts.isoformat()
    return micros_to_datetime(int(ts)).isoformat().replace("+00:00", "Z")


def _fit_series(partition: SeriesPartition, run: RunConfig, specs: list[HolidaySpec]):
    cfg = run.pipeline
    freq_name = cfg.data_frequency.upper()
    override = None
    if freq_name != "AUTO_FREQUENCY":
        override = Frequency.named(freq_name)
    raw = RawSeries(
        points=list(zip(partition.timestamps, partition.values)),
        series_id=partition.id_tuple,
    )
    series = regularize(raw, freq_override=override, tz=cfg.time_zone)
    if cfg.model_type == "ARIMA_PLUS_XREG" and partition.covariates:
        covariates = _align_covariates(series, partition)
        bundle = xr.fit_xreg_pipeline(series, covariates, cfg)
    else:
        bundle = pl.fit(series, cfg, holiday_specs=specs)
    return series, bundle


def _forecast_bundle(bundle, run: RunConfig, future_covariates=None):
    if isinstance(bundle, xr.XregBundle):
        horizon = bundle.residual_pipeline.horizon
        return xr.forecast_xreg(
            bundle, future_covariates or {}, horizon, run.confidence_level
        )
    return pl.forecast(bundle, bundle.horizon, run.confidence_level)


def _inner_pipeline(bundle) -> pl.FittedPipeline:
    return bundle.residual_pipeline if isinstance(bundle, xr.XregBundle) else bundle


def _model_json(bundle) -> str:
    if isinstance(bundle, xr.XregBundle):
        return json.dumps(
            {
                "type": "xreg",
                "ridge": {
                    "beta": bundle.ridge.beta.tolist(),
                    "lam": bundle.ridge.lam,
                    "column_names": bundle.ridge.column_names,
                },
                "encoding_map": bundle.encoding_map,
                "n_train": bundle.n_train,
                "linear_history": bundle.linear_history.tolist(),
                "residual_model": pl.bundle_to_dict(bundle.residual_pipeline),
            }
        )
    return json.dumps({"type": "univariate", "model": pl.bundle_to_dict(bundle)})


def _load_model_json(doc: dict):
    if doc.get("type") == "xreg":
        ridge = xr.RidgeModel(
            beta=np.array(doc["ridge"]["beta"]),
            lam=doc["ridge"]["lam"],
            column_names=doc["ridge"]["column_names"],
        )
        return xr.XregBundle(
            ridge=ridge,
            encoding_map=doc["encoding_map"],
            residual_pipeline=pl.bundle_from_dict(doc["residual_model"]),
            n_train=doc["n_train"],
            linear_history=np.array(doc["linear_history"]),
        )
    return pl.bundle_from_dict(doc["model"])


def _process_one(args) -> SeriesResult:
    partition, run, specs, want, future_cov = args
    result = SeriesResult(id_tuple=partition.id_tuple)
    try:
        series, bundle = _fit_series(partition, run, specs)
        inner = _inner_pipeline(bundle)
        if "model" in want:
            result.model_json = _model_json(bundle)
        if "forecast" in want:
            fc = _forecast_bundle(bundle, run, future_cov)
            result.forecast_rows = [
                (
                    _format_timestamp(ts),
                    fc.mean[i],
                    fc.stderr[i],
                    fc.lower[i],
                    fc.upper[i],
                    fc.confidence_level,
                )
                for i, ts in enumerate(fc.timestamps)
            ]
        if "components" in want and run.pipeline.decompose_time_series:
            result.component_rows = _component_rows(inner)
        if "anomalies" in want:
            verdicts = pl.detect_anomalies(inner, run.anomaly_threshold)
            result.anomaly_rows = [
                (
                    _format_timestamp(v.timestamp),
                    v.actual,
                    v.expected,
                    v.lower,
                    v.upper,
                    v.probability,
                    v.is_anomaly,
                )
                for v in verdicts
            ]
    except Exception as exc:  # per-series isolation: record, never abort
        stage = exc.stage if hasattr(exc, "stage") else type(exc).__name__
        result.error = str(exc)
        result.stage = str(stage)
    return result


def _component_rows(bundle: pl.FittedPipeline) -> list:
    dec = pl.decompose(bundle)
    rows = []
    hist_ts = bundle.series.slot_timestamps()
    for name, values in dec.history.items():
        for ts, value in zip(hist_ts, values):
            rows.append((_format_timestamp(ts), name, value, "history"))
    future_ts = bundle.series.slot_timestamps(count=bundle.horizon, start_slot=bundle.n)
    for name, values in dec.future.items():
        for ts, value in zip(future_ts, values):
            rows.append((_format_timestamp(ts), name, value, "forecast"))
    return rows


def _run_pool(partitions, run, specs, want, future_cov_by_id=None):
    """Map series through the worker pool, preserving partition order."""
    future_cov_by_id = future_cov_by_id or {}
    tasks = [
        (p, run, specs, want, future_cov_by_id.get(p.id_tuple)) for p in partitions
    ]
    if run.workers <= 1 or len(partitions) <= 1:
        for task in tasks:
            yield _process_one(task)
        return
    chunk = max(1, len(tasks) // (run.workers * 8))
    with ProcessPoolExecutor(max_workers=run.workers) as pool:
        yield from pool.map(_process_one, tasks, chunksize=chunk)


class _Writers:
    """Lazily opened CSV writers in the output directory."""

    def __init__(self, outdir: str, id_cols: list[str]):
        self.outdir = outdir
        self.id_cols = id_cols
        self._files = {}
        self._writers = {}
        os.makedirs(outdir, exist_ok=True)

    def _writer(self, name: str, header: list[str]):
        if name not in self._writers:
            handle = open(os.path.join(self.outdir, name), "w", newline="",
                          encoding="utf-8")
            writer = csv.writer(handle)
            writer.writerow(header)
            self._files[name] = handle
            self._writers[name] = writer
        return self._writers[name]

    def forecast(self, ids, rows):
        writer = self._writer(
            "forecasts.csv",
            [*self.id_cols, "timestamp", "forecast_value", "standard_error",
             "lower_bound", "upper_bound", "confidence_level"],
        )
        for row in rows:
            writer.writerow([*ids, *row])

    def components(self, ids, rows):
        writer = self._writer(
            "components.csv",
            [*self.id_cols, "timestamp", "component_name", "value", "span"],
        )
        for ts, name, value, span in rows:
            writer.writerow([*ids, ts, name, value, span])

    def anomalies(self, ids, rows):
        writer = self._writer(
            "anomalies.csv",
            [*self.id_cols, "timestamp", "value", "expected", "lower_bound",
             "upper_bound", "anomaly_probability", "is_anomaly"],
        )
        for row in rows:
            writer.writerow([*ids, *row])

    def error(self, ids, stage, message):
        writer = self._writer("errors.csv", [*self.id_cols, "stage", "error"])
        writer.writerow([*ids, stage, message])

    def metrics(self, row: dict):
        writer = self._writer("metrics.csv", list(row.keys()))
        writer.writerow(list(row.values()))

    def close(self):
        for handle in self._files.values():
            handle.close()


def _future_covariates_by_id(
    run: RunConfig, path: Optional[str]
) -> dict[tuple, dict[str, list]]:
    """Partition a future-covariate CSV by series id."""
    if not path:
        return {}
    header, rows = _read_csv(path)
    id_cols = list(run.time_series_id_col)
    reserved = {run.time_series_timestamp_col, *id_cols}
    cov_cols = [c for c in header if c not in reserved]
    out: dict[tuple, dict[str, list]] = {}
    for row in rows:
        key = tuple(row[c] for c in id_cols)
        cov = out.setdefault(key, {c: [] for c in cov_cols})
        for c in cov_cols:
            cov[c].append(row[c])
    return out


def run_fit_forecast(
    run: RunConfig,
    input_path: str,
    output_dir: str,
    want: tuple[str, ...] = ("forecast", "components", "model"),
    future_covariates_path: Optional[str] = None,
) -> dict:
    """Fit every series in the input and write the requested outputs.

    Returns a summary dict with counts and throughput; per-series failures
    land in ``errors.csv``.
    """
    header, rows = _read_csv(input_path)
    cfg = run.pipeline
    id_cols = list(run.time_series_id_col)
    covariate_cols = []
    if cfg.model_type == "ARIMA_PLUS_XREG":
        reserved = {run.time_series_timestamp_col, run.time_series_data_col, *id_cols}
        covariate_cols = [c for c in header if c not in reserved]
    partitions = partition_input(
        rows, id_cols, run.time_series_timestamp_col, run.time_series_data_col,
        covariate_cols,
    )
    specs = specs_from_csv(run.custom_holiday_file) if run.custom_holiday_file else []
    future_cov = _future_covariates_by_id(run, future_covariates_path)

    writers = _Writers(output_dir, id_cols)
    models_path = os.path.join(output_dir, "models.jsonl")
    models_file = open(models_path, "w", encoding="utf-8") if "model" in want else None

    started = time.perf_counter()
    ok = failed = 0
    try:
        for result in _run_pool(partitions, run, specs, want, future_cov):
            ids = list(result.id_tuple)
            if result.error is not None:
                failed += 1
                writers.error(ids, result.stage, result.error)
                continue
            ok += 1
            if result.forecast_rows is not None:
                writers.forecast(ids, result.forecast_rows)
            if result.component_rows is not None:
                writers.components(ids, result.component_rows)
            if result.anomaly_rows is not None:
                writers.anomalies(ids, result.anomaly_rows)
            if models_file is not None and result.model_json is not None:
                models_file.write(
                    json.dumps({"series_id": ids}) [:-1]
                    + ', "model": ' + result.model_json + "}\n"
                )
    finally:
        writers.close()
        if models_file is not None:
            models_file.close()
    elapsed = time.perf_counter() - started
    summary = {
        "series": len(partitions),
        "succeeded": ok,
        "failed": failed,
        "seconds": elapsed,
        "series_per_second": (ok + failed) / elapsed if elapsed > 0 else float("inf"),
    }
    print(
        f"processed {summary['series']} series in {elapsed:.1f}s "
        f"({summary['series_per_second']:.1f} series/second), {failed} failed",
        file=sys.stderr,
    )
    return summary


def run_forecast_from_models(
    run: RunConfig,
    model_path: str,
    output_dir: str,
    future_covariates_path: Optional[str] = None,
) -> dict:
    """Forecast from a saved models.jsonl without refitting."""
    future_cov = _future_covariates_by_id(run, future_covariates_path)
    writers = _Writers(output_dir, list(run.time_series_id_col))
    ok = failed = 0
    try:
        with open(model_path, encoding="utf-8") as handle:
            for line in handle:
                doc = json.loads(line)
                ids = doc["series_id"]
                try:
                    bundle = _load_model_json(doc["model"])
                    fc = _forecast_bundle(bundle, run, future_cov.get(tuple(ids)))
                    writers.forecast(
                        ids,
                        [
                            (
                                _format_timestamp(ts),
                                fc.mean[i],
                                fc.stderr[i],
                                fc.lower[i],
                                fc.upper[i],
                                fc.confidence_level,
                            )
                            for i, ts in enumerate(fc.timestamps)
                        ],
                    )
                    ok += 1
                except Exception as exc:
                    failed += 1
                    writers.error(ids, type(exc).__name__, str(exc))
    finally:
        writers.close()
    return {"series": ok + failed, "succeeded": ok, "failed": failed}


def run_detect_anomalies(
    run: RunConfig,
    input_path: str,
    output_dir: str,
    model_path: Optional[str] = None,
) -> dict:
    """Score history slots of every series against its fitted components."""
    if model_path is None:
        return run_fit_forecast(run, input_path, output_dir, want=("anomalies",))

    header, rows = _read_csv(input_path)
    id_cols = list(run.time_series_id_col)
    partitions = partition_input(
        rows, id_cols, run.time_series_timestamp_col, run.time_series_data_col
    )
    by_id = {}
    with open(model_path, encoding="utf-8") as handle:
        for line in handle:
            doc = json.loads(line)
            by_id[tuple(doc["series_id"])] = doc

    writers = _Writers(output_dir, id_cols)
    ok = failed = 0
    try:
        for part in partitions:
            ids = [str(v) for v in part.id_tuple]
            doc = by_id.get(tuple(ids))
            if doc is None:
                failed += 1
                writers.error(ids, "load", "no saved model for this series id")
                continue
            try:
                bundle = _inner_pipeline(_load_model_json(doc["model"]))
                values = np.array(
                    [float(v) for v in part.values[: bundle.horizon]]
                )
                verdicts = pl.detect_anomalies(
                    bundle, run.anomaly_threshold, new_values=values
                )
                writers.anomalies(
                    ids,
                    [
                        (
                            _format_timestamp(v.timestamp),
                            v.actual,
                            v.expected,
                            v.lower,
                            v.upper,
                            v.probability,
                            v.is_anomaly,
                        )
                        for v in verdicts
                    ],
                )
                ok += 1
            except Exception as exc:
                failed += 1
                writers.error(ids, type(exc).__name__, str(exc))
    finally:
        writers.close()
    return {"series": len(partitions), "succeeded": ok, "failed": failed}


def _evaluate_partitions(run, train_parts, test_by_id, specs, writers):
    rows_out = []
    for part in train_parts:
        ids = list(part.id_tuple)
        test = test_by_id.get(part.id_tuple)
        if test is None:
            writers.error(ids, "evaluate", "no matching series in actuals input")
            continue
        try:
            series, bundle = _fit_series(part, run, specs)
            horizon = min(len(test.values), _inner_pipeline(bundle).horizon)
            fc = _forecast_bundle(bundle, run)
            actuals = np.array([float(v) for v in test.values[:horizon]])
            train_values = np.asarray(series.values, dtype=float)
            train_values = train_values[np.isfinite(train_values)]
            report = compute_metrics(
                actuals, fc.mean[:horizon], train_values, mase_period(series.freq)
            )
            row = {
                **{c: v for c, v in zip(run.time_series_id_col, ids)},
                "horizon": horizon,
                "mae": report.mae,
                "rmse": report.rmse,
                "mape": report.mape,
                "smape": report.smape,
                "mase": report.mase,
            }
            writers.metrics(row)
            rows_out.append(row)
        except Exception as exc:
            writers.error(ids, type(exc).__name__, str(exc))
    return rows_out


def run_evaluate(run: RunConfig, input_path: str, actuals_path: str, output_dir: str):
    """Fit on the input, score forecasts against held-out actuals."""
    id_cols = list(run.time_series_id_col)
    _, train_rows = _read_csv(input_path)
    _, test_rows = _read_csv(actuals_path)
    train_parts = partition_input(
        train_rows, id_cols, run.time_series_timestamp_col, run.time_series_data_col
    )
    test_parts = partition_input(
        test_rows, id_cols, run.time_series_timestamp_col, run.time_series_data_col
    )
    test_by_id = {p.id_tuple: p for p in test_parts}
    specs = specs_from_csv(run.custom_holiday_file) if run.custom_holiday_file else []
    writers = _Writers(output_dir, id_cols)
    try:
        rows = _evaluate_partitions(run, train_parts, test_by_id, specs, writers)
    finally:
        writers.close()
    return rows


def run_benchmark(run: RunConfig, data_dir: str, output_dir: str) -> list[dict]:
    """Evaluate every dataset directory (train.csv/test.csv pairs).

    Per-dataset metrics are series means; a final row carries the geometric
    mean of the per-dataset scaled errors.
    """
    os.makedirs(output_dir, exist_ok=True)
    datasets = sorted(
        d
        for d in os.listdir(data_dir)
        if os.path.isfile(os.path.join(data_dir, d, "train.csv"))
    )
    report_rows = []
    started = time.perf_counter()
    total_series = 0
    for name in datasets:
        base = os.path.join(data_dir, name)
        ds_run = run
        cfg_path = os.path.join(base, "config.json")
        if os.path.isfile(cfg_path):
            with open(cfg_path, encoding="utf-8") as handle:
                overrides = json.load(handle)
            ds_run = with_overrides(run, **{k.lower(): v for k, v in overrides.items()})
        rows = run_evaluate(
            ds_run,
            os.path.join(base, "train.csv"),
            os.path.join(base, "test.csv"),
            os.path.join(output_dir, name),
        )
        if not rows:
            continue
        total_series += len(rows)
        mases = [r["mase"] for r in rows if np.isfinite(r["mase"])]
        report_rows.append(
            {
                "dataset": name,
                "horizon": int(np.median([r["horizon"] for r in rows])),
                "mae": float(np.mean([r["mae"] for r in rows])),
                "rmse": float(np.mean([r["rmse"] for r in rows])),
                "mape": float(np.mean([r["mape"] for r in rows])),
                "smape": float(np.mean([r["smape"] for r in rows])),
                "mase": float(np.mean(mases)) if mases else float("nan"),
            }
        )
    elapsed = time.perf_counter() - started
    print(
        f"benchmark: {total_series} series across {len(datasets)} datasets in "
        f"{elapsed:.1f}s ({total_series / elapsed if elapsed else 0:.1f} series/second)",
        file=sys.stderr,
    )

    with open(os.path.join(output_dir, "report.csv"), "w", newline="",
              encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle,
            fieldnames=["dataset", "horizon", "mae", "rmse", "mape", "smape", "mase"],
        )
        writer.writeheader()
        for row in report_rows:
            writer.writerow(row)
        finite = [r["mase"] for r in report_rows if np.isfinite(r["mase"])]
        if finite:
            writer.writerow(
                {
                    "dataset": "geometric_mean",
                    "horizon": "",
                    "mae": "",
                    "rmse": "",
                    "mape": "",
                    "smape": "",
                    "mase": geometric_mean_mase(finite),
                }
            )
    return report_rows


def _build_run_config(args) -> RunConfig:
    run = load_config(args.config) if args.config else config_from_mapping({})
    overrides = {}
    for key in ("workers", "confidence_level", "strict"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "threshold", None) is not None:
        overrides["anomaly_threshold"] = args.threshold
    if getattr(args, "custom_holidays", None):
        overrides["custom_holiday_file"] = args.custom_holidays
    return with_overrides(run, **overrides)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="batchcast",
        description="Batch time-series forecasting and anomaly detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True, input_required=True):
        if needs_input:
            p.add_argument("--input", required=input_required, help="input CSV path")
        p.add_argument("--output-dir", required=True)
        p.add_argument("--config", help="JSON or TOML option file")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--confidence-level", type=float, default=None,
                       dest="confidence_level")
        p.add_argument("--threshold", type=float, default=None,
                       help="anomaly probability threshold")
        p.add_argument("--custom-holidays", default=None,
                       help="CSV of region,holiday,date,pre_days,post_days rows")
        p.add_argument("--strict", action="store_true", default=None,
                       help="exit nonzero when any series fails")

    common(sub.add_parser("fit", help="fit models and save them"))
    p_fc = sub.add_parser("forecast", help="fit (or load) models and forecast")
    common(p_fc, input_required=False)
    p_fc.add_argument("--model", help="existing models.jsonl")
    p_fc.add_argument("--future-covariates", dest="future_covariates",
                      help="CSV of future covariate rows (covariate models)")
    common(sub.add_parser("decompose", help="emit per-slot components"))
    p_anom = sub.add_parser("detect-anomalies", help="score slots for anomalies")
    common(p_anom)
    p_anom.add_argument("--model", help="existing models.jsonl; scores new data")
    p_eval = sub.add_parser("evaluate", help="fit on input, score against actuals")
    common(p_eval)
    p_eval.add_argument("--actuals", required=True, help="held-out CSV")
    p_bench = sub.add_parser("benchmark", help="run train/test dataset directories")
    common(p_bench, needs_input=False)
    p_bench.add_argument("--data-dir", required=True)

    args = parser.parse_args(argv)
    try:
        run = _build_run_config(args)
    except BatchcastError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "fit":
            summary = run_fit_forecast(run, args.input, args.output_dir,
                                       want=("model", "components"))
        elif args.command == "forecast":
            summary = run_fit_forecast(run, args.input, args.output_dir)
        elif args.command == "decompose":
            summary = run_fit_forecast(run, args.input, args.output_dir,
                                       want=("components",))
        elif args.command == "detect-anomalies":
            summary = run_detect_anomalies(run, args.input, args.output_dir,
                                           model_path=args.model)
        elif args.command == "evaluate":
            run_evaluate(run, args.input, args.actuals, args.output_dir)
            summary = {"failed": 0}
        else:
            run_benchmark(run, args.data_dir, args.output_dir)
            summary = {"failed": 0}
    except OSError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    if run.strict and summary.get("failed", 0) > 0:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
