"""Command line front end: ``fm2i transform | forecast | bench``.

Exit codes: 0 success, 2 input error, 3 infeasible model, 4 incomplete
comparison.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import StageError
from .bench import (
    Dataset,
    DatasetError,
    IncompleteComparison,
    compare,
    ingest_csv,
    metrics,
    naive_forecast,
    read_method_dir,
    write_forecasts,
)
from .imaging import EncodingSpec, encode, export_ppm
from .series import TimeSeries, minmax_scale
from .transforms import GCClampWarning, Kind, build, dump_csv, rescale
from .tuner import ConfigSpace, ModelConfig, NoFeasibleModel, forecast, grid_search, read_key_values, select

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INCOMPLETE = 0, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- helpers ------------------------------------------------------------------


def read_series_file(path) -> Dataset:
    """Dataset CSV (``id,category,...``) or a single column of values."""
    path = Path(path)
    if not path.is_file():
        raise CLIError(f"input file not found: {path}", EXIT_INPUT)
    with open(path, newline="") as fh:
        first = fh.readline().strip().lower()
    if first.startswith("id,"):
        try:
            return ingest_csv(path)
        except DatasetError as exc:
            raise CLIError("invalid dataset:\n  " + "\n  ".join(exc.problems), EXIT_INPUT) from None
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[-1]))
            except ValueError:
                if lineno == 1:
                    continue
                raise CLIError(f"{path}: line {lineno}: not a number: {row[-1]!r}", EXIT_INPUT) from None
    try:
        return Dataset([TimeSeries(np.array(values), id=path.stem)])
    except ValueError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_INPUT) from None


def write_manifest(out: Path, command: str, config: dict, inputs: dict, outputs: list[str], seed) -> None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    manifest = {
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": sorted(outputs),
        "seed": seed,
        "timestamp": stamp.isoformat(),
        "version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_space(args) -> ConfigSpace:
    if getattr(args, "space", None):
        try:
            return ConfigSpace.from_file(args.space)
        except (OSError, ValueError) as exc:
            raise CLIError(f"bad config space file: {exc}", EXIT_INPUT) from None
    return ConfigSpace()


def _load_config(path) -> ModelConfig:
    try:
        mapping = read_key_values(Path(path).read_text())
    except OSError as exc:
        raise CLIError(f"cannot read config: {exc}", EXIT_INPUT) from None
    kw = {}
    try:
        for key, value in mapping.items():
            if key in ("kind", "transform"):
                kw["kind"] = value
            elif key == "differenced":
                kw["differenced"] = value.lower() in ("true", "yes", "1", "on")
            elif key in ("series_lo", "series_hi", "matrix_lo", "matrix_hi"):
                kw[key] = float(value)
            elif key in ("patch", "patch_size"):
                kw["patch_size"] = int(value)
            elif key in ("encoding", "estimator"):
                kw[key] = value
            else:
                raise ValueError(f"unknown key {key!r}")
        return ModelConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"bad model config: {exc}", EXIT_INPUT) from None


def _kind_bounds(kind: Kind) -> tuple[float, float]:
    return (-1.0, 1.0) if kind in (Kind.STAM, Kind.MAC) else (0.0, 1.0)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- transform ----------------------------------------------------------------


def cmd_transform(args) -> int:
    dataset = read_series_file(args.input)
    try:
        kind = Kind.parse(args.kind)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_INPUT) from None
    lo, hi = (float(v) for v in args.bounds.split(",")) if args.bounds else _kind_bounds(kind)
    out = _out_dir(args.out)
    outputs = []
    for s in dataset:
        x, _ = minmax_scale(s.values, lo, hi)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GCClampWarning)
            try:
                matrix = build(kind, x)
                scaled, _ = rescale(matrix)
            except ValueError as exc:
                raise CLIError(f"[transform] {s.id}: {exc}", EXIT_INPUT) from None
        for w in caught:
            print(f"warning: {s.id}: {w.message}", file=sys.stderr)
        stem = f"{s.id}_{kind.value.lower()}"
        dump_csv(matrix, out / f"{stem}.csv")
        export_ppm(encode(scaled.data, EncodingSpec()), out / f"{stem}.ppm")
        outputs += [f"{stem}.csv", f"{stem}.ppm"]
    write_manifest(out, "transform", {"kind": kind.value, "bounds": [lo, hi]},
                   {"input": str(args.input)}, outputs, args.seed)
    return EXIT_OK


# -- forecast -----------------------------------------------------------------


def _forecast_one(s: TimeSeries, h: int, holdout: bool, cfg: ModelConfig | None, space: ConfigSpace):
    """Returns (forecast, chosen config, model log or None)."""
    values = s.values[:-h] if holdout and h else s.values
    log = None
    if h == 0:
        return np.empty(0), cfg, None
    try:
        if cfg is None:
            log = grid_search(values, space, h)
            cfg = select(log, space)
        return forecast(values, cfg, h, space.search_region), cfg, log
    except NoFeasibleModel as exc:
        raise CLIError(f"{s.id}: infeasible model: {exc}", EXIT_INFEASIBLE) from None
    except StageError as exc:
        raise CLIError(f"{s.id}: infeasible model: {exc}", EXIT_INFEASIBLE) from None
    except ValueError as exc:
        raise CLIError(f"{s.id}: infeasible model: {exc}", EXIT_INFEASIBLE) from None


def cmd_forecast(args) -> int:
    dataset = read_series_file(args.input)
    if args.horizon is not None and args.horizon < 0:
        raise CLIError("--horizon must be >= 0", EXIT_INPUT)
    if args.config and args.auto:
        raise CLIError("use either --config or --auto", EXIT_INPUT)
    cfg = _load_config(args.config) if args.config else None
    space = _load_space(args)
    out = _out_dir(args.out)
    forecasts, models, metric_rows, plot_rows = {}, [], [], []
    logs_dir = out / "logs"
    outputs = ["forecasts.csv", "models.csv", "forecast_vs_actual.csv"]
    for s in dataset:
        h = s.horizon if args.horizon is None else args.horizon
        if args.holdout and h >= len(s):
            raise CLIError(f"{s.id}: horizon exceeds series", EXIT_INPUT)
        fc, chosen, log = _forecast_one(s, h, args.holdout, cfg, space)
        forecasts[s.id] = fc
        models.append((s.id, chosen.label() if chosen else ""))
        if log is not None:
            logs_dir.mkdir(exist_ok=True)
            log.write(logs_dir / f"{s.id}.csv")
            outputs.append(f"logs/{s.id}.csv")
        known = s.values[:-h] if args.holdout and h else s.values
        for t, v in enumerate(known):
            plot_rows.append([s.id, t, repr(float(v)), ""])
        actual = s.values[-h:] if args.holdout and h else None
        for k, v in enumerate(fc):
            a = "" if actual is None else repr(float(actual[k]))
            plot_rows.append([s.id, len(known) + k, a, repr(float(v))])
        if args.holdout and h:
            row = metrics(fc, actual)
            metric_rows.append([s.id] + ["" if v is None else repr(v) for v in
                                        (row.mse, row.rmse, row.mae, row.mape, row.smape)])
    write_forecasts(forecasts, out / "forecasts.csv", dataset.ids())
    with open(out / "models.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "config"])
        w.writerows(models)
    with open(out / "forecast_vs_actual.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "t", "actual", "forecast"])
        w.writerows(plot_rows)
    if args.holdout:
        with open(out / "metrics.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "mse", "rmse", "mae", "mape", "smape"])
            w.writerows(metric_rows)
        outputs.append("metrics.csv")
    config = {"mode": "config" if cfg else "auto", "horizon": args.horizon, "holdout": args.holdout}
    config["model"] = cfg.as_dict() if cfg else None
    config["space"] = None if cfg else space.to_text()
    write_manifest(out, "forecast", config, {"input": str(args.input), "config": args.config,
                                             "space": args.space}, outputs, args.seed)
    return EXIT_OK


# -- bench --------------------------------------------------------------------


def _bench_series(job):
    s, space = job
    h = s.horizon
    train = s.values[:-h]
    try:
        log = grid_search(train, space, h)
        cfg = select(log, space)
        return s.id, forecast(train, cfg, h, space.search_region), cfg.label(), log.to_csv(), ""
    except (NoFeasibleModel, StageError, ValueError) as exc:
        return s.id, None, "", "", str(exc)


def cmd_bench(args) -> int:
    try:
        dataset = ingest_csv(args.dataset)
    except FileNotFoundError:
        raise CLIError(f"dataset not found: {args.dataset}", EXIT_INPUT) from None
    except DatasetError as exc:
        raise CLIError("dataset schema violations:\n  " + "\n  ".join(exc.problems), EXIT_INPUT) from None
    external = {}
    if args.methods:
        try:
            external = read_method_dir(args.methods)
        except FileNotFoundError as exc:
            raise CLIError(str(exc), EXIT_INPUT) from None
        except DatasetError as exc:
            raise CLIError("method file schema violations:\n  " + "\n  ".join(exc.problems), EXIT_INPUT) from None
    space = _load_space(args)
    out = _out_dir(args.out)
    (out / "forecasts").mkdir(exist_ok=True)
    (out / "logs").mkdir(exist_ok=True)
    outputs = ["report.txt", "summary.csv", "per_series.csv", "models.csv"]

    method_forecasts: dict[str, dict[str, np.ndarray]] = {}
    if "FM2I" in external:
        method_forecasts["FM2I"] = external.pop("FM2I")
        models = []
    else:
        jobs = [(s, space) for s in dataset]
        threads = args.threads or os.cpu_count() or 1
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_bench_series, jobs))
        else:
            results = [_bench_series(job) for job in jobs]
        failures = [f"{sid}: {err}" for sid, fc, _, _, err in results if fc is None]
        if failures:
            raise CLIError("infeasible model:\n  " + "\n  ".join(failures), EXIT_INFEASIBLE)
        method_forecasts["FM2I"] = {sid: fc for sid, fc, _, _, _ in results}
        models = [(sid, label) for sid, _, label, _, _ in results]
        for sid, _, _, log_csv, _ in results:
            (out / "logs" / f"{sid}.csv").write_text(log_csv)
            outputs.append(f"logs/{sid}.csv")
    if "Naive" not in external:
        method_forecasts["Naive"] = {s.id: naive_forecast(s.values[:-s.horizon], s.horizon) for s in dataset}
    method_forecasts.update(external)

    periods = sorted({s.period.value for s in dataset})
    title = f"sMAPE and ranks of error: {len(dataset)} {'/'.join(periods)} TS"
    try:
        report = compare(dataset, method_forecasts, title=title)
    except IncompleteComparison as exc:
        raise CLIError("incomplete comparison, missing forecasts:\n  " + "\n  ".join(exc.gaps),
                       EXIT_INCOMPLETE) from None
    for m, fcs in method_forecasts.items():
        write_forecasts(fcs, out / "forecasts" / f"{m}.csv", dataset.ids())
        outputs.append(f"forecasts/{m}.csv")
    (out / "report.txt").write_text(report.to_text())
    (out / "summary.csv").write_text(report.summary_csv())
    (out / "per_series.csv").write_text(report.per_series_csv())
    with open(out / "models.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "config"])
        w.writerows(models)
    write_manifest(out, "bench", {"methods": report.methods, "space": space.to_text(),
                                  "threads": args.threads},
                   {"dataset": str(args.dataset), "methods": args.methods, "space": args.space},
                   outputs, args.seed)
    sys.stdout.write(report.to_text())
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fm2i", description="Time-series forecasting by image inpainting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker processes (default: CPU count)")
        p.add_argument("--seed", type=int, default=None, help="recorded in the manifest; the pipeline is deterministic")

    p = sub.add_parser("transform", help="dump a series' matrix and encoded image")
    p.add_argument("input")
    p.add_argument("--kind", required=True, help="STAM, MAC, GASF, GC, GCS1, GCS2 or RPM")
    p.add_argument("--bounds", help="series scaling bounds 'lo,hi' (default per kind)")
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("forecast", help="forecast every series in a file")
    p.add_argument("input")
    p.add_argument("--horizon", type=int, default=None, help="steps ahead (default: per-series horizon)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--config", help="fixed model config file (key = value lines)")
    mode.add_argument("--auto", action="store_true", help="tune by grid search (default)")
    p.add_argument("--space", help="config space file for --auto")
    p.add_argument("--holdout", action="store_true", help="hold out the last horizon values and score them")
    common(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("bench", help="compare FM2I, Naive and external forecasts on a dataset")
    p.add_argument("dataset")
    p.add_argument("--methods", help="directory of <method>.csv forecast files (id,step,value)")
    p.add_argument("--space", help="config space file for the FM2I grid search")
    common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
