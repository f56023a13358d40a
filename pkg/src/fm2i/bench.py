"""M3-style dataset ingestion, error metrics and method comparison tables."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_horizon, check_series
from .series import DEFAULT_HORIZONS, Period, TimeSeries

CATEGORIES = ("micro", "industry", "macro", "finance", "demog", "other")
METRICS = ("mse", "rmse", "mae", "mape", "smape")
DATASET_HEADER = ["id", "category", "period", "horizon", "n"]


class DatasetError(ValueError):
    """One or more dataset rows violate the CSV schema."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class IncompleteComparison(ValueError):
    def __init__(self, gaps: list[str]):
        self.gaps = gaps
        super().__init__("missing forecasts: " + ", ".join(gaps))


@dataclass
class Dataset:
    series: list[TimeSeries]

    def __len__(self):
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def by_period(self) -> dict[Period, list[TimeSeries]]:
        out: dict[Period, list[TimeSeries]] = defaultdict(list)
        for s in self.series:
            out[s.period].append(s)
        return dict(out)

    def subset(self, period) -> "Dataset":
        period = Period.parse(period)
        return Dataset([s for s in self.series if s.period is period])

    def ids(self) -> list[str]:
        return [s.id for s in self.series]


def ingest_csv(path) -> Dataset:
    """Read ``id,category,period,horizon,n,v0,v1,...`` rows.

    An empty horizon falls back to the period default (yearly 6,
    quarterly 8, monthly 18, other 8). All malformed rows are reported
    together in one :class:`DatasetError`.
    """
    problems: list[str] = []
    series: list[TimeSeries] = []
    seen: set[str] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:5]] != DATASET_HEADER:
            raise DatasetError([f"row 1: header must start with {','.join(DATASET_HEADER)}"])
        for rowno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            sid = row[0].strip()
            if sid and sid in seen:
                problems.append(f"row {rowno}: duplicate id {sid!r}")
            seen.add(sid)
            try:
                series.append(_parse_row(row))
            except ValueError as exc:
                problems.append(f"row {rowno}: {exc}")
    if problems:
        raise DatasetError(problems)
    return Dataset(series)


def _parse_row(row: list[str]) -> TimeSeries:
    if len(row) < 6:
        raise ValueError("expected id,category,period,horizon,n and values")
    sid, category, period, horizon, n = (c.strip() for c in row[:5])
    if not sid:
        raise ValueError("empty id")
    category = category.lower() or "other"
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    period = Period.parse(period)
    try:
        n = int(n)
        values = [float(v) for v in row[5:] if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"non-numeric field ({exc})") from None
    if len(values) != n:
        raise ValueError(f"n={n} but {len(values)} values given")
    h = int(horizon) if horizon else DEFAULT_HORIZONS[period]
    if h < 1:
        raise ValueError(f"horizon must be positive, got {h}")
    if h >= n:
        raise ValueError(f"horizon {h} >= series length {n}")
    return TimeSeries(np.array(values), id=sid, period=period, declared_horizon=h, category=category)


def write_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        longest = max((len(s) for s in dataset), default=0)
        writer.writerow(DATASET_HEADER + [f"v{i}" for i in range(longest)])
        for s in dataset:
            writer.writerow([s.id, s.category, s.period.value, s.horizon, len(s)] + [repr(float(v)) for v in s.values])


# -- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricRow:
    """Errors of one forecast; ``mape``/``smape`` are percentages or None when undefined."""

    mse: float
    rmse: float
    mae: float
    mape: float | None
    smape: float | None

    def get(self, name: str):
        return getattr(self, name)


def metrics(forecasts, actuals) -> MetricRow:
    """MSE, RMSE = sqrt(MSE), MAE, MAPE and sMAPE of ``forecasts`` vs ``actuals``."""
    f = check_series(forecasts, min_length=1, name="forecasts")
    a = check_series(actuals, min_length=1, name="actuals")
    if f.size != a.size:
        raise ValueError(f"length mismatch: {f.size} forecasts vs {a.size} actuals")
    err = f - a
    mse = float(np.mean(err * err))
    mae = float(np.mean(np.abs(err)))
    mape = None
    if np.all(a != 0):
        mape = float(100.0 * np.mean(np.abs(err / a)))
    smape = None
    denom = np.abs(f) + np.abs(a)
    if np.all(denom != 0):
        smape = float(200.0 * np.mean(np.abs(err) / denom))
    return MetricRow(mse=mse, rmse=math.sqrt(mse), mae=mae, mape=mape, smape=smape)


def naive_forecast(series, h: int) -> np.ndarray:
    """Random-walk naive: repeat the last observation ``h`` times."""
    values = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if values.size == 0:
        raise ValueError("naive forecast needs a non-empty series")
    return np.full(check_horizon(h), values[-1])


# -- comparison ---------------------------------------------------------------


@dataclass
class MetricsReport:
    methods: list[str]
    series_ids: list[str]
    per_series: dict[tuple[str, str], MetricRow]
    averages: dict[str, dict[str, float]]
    excluded: dict[str, dict[str, int]]
    ranks: dict[str, dict[str, int]]
    best_counts: dict[str, float]
    title: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def best_percent(self) -> dict[str, float]:
        n = len(self.series_ids)
        return {m: 100.0 * c / n for m, c in self.best_counts.items()}

    def per_series_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "method"] + list(METRICS))
        for sid in self.series_ids:
            for m in self.methods:
                row = self.per_series[(sid, m)]
                writer.writerow([sid, m] + [_fmt_csv(row.get(k)) for k in METRICS])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["method"] + list(METRICS) + [f"rank_{k}" for k in METRICS]
            + [f"excluded_{k}" for k in ("mape", "smape")] + ["times_best", "pct_best"]
        )
        pct = self.best_percent
        for m in self.methods:
            writer.writerow(
                [m] + [_fmt_csv(self.averages[m][k]) for k in METRICS]
                + [self.ranks[k][m] for k in METRICS]
                + [self.excluded[m][k] for k in ("mape", "smape")]
                + [_fmt_csv(self.best_counts[m]), _fmt_csv(pct[m])]
            )
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned tables: average errors with ranks, then times ranked best."""
        order = sorted(self.methods, key=lambda m: self.ranks["smape"][m])
        head = ["Method", "MSE.10^3", "MAE", "RMSE", "MAPE %", "sMAPE %",
                "r:MAE", "r:MSE", "r:RMSE", "r:MAPE", "r:sMAPE"]
        rows = []
        for m in order:
            av = self.averages[m]
            rows.append([
                m, _fmt(av["mse"] / 1e3), _fmt(av["mae"]), _fmt(av["rmse"]), _fmt(av["mape"]),
                _fmt(av["smape"]),
            ] + [str(self.ranks[k][m]) for k in ("mae", "mse", "rmse", "mape", "smape")])
        lines = []
        if self.title:
            lines.append(self.title)
        lines.append(_align([head] + rows))
        lines.append("")
        pct = self.best_percent
        best_head = [""] + self.methods
        lines.append(_align([
            best_head,
            ["times ranked best"] + [_fmt_count(self.best_counts[m]) for m in self.methods],
            ["% ranked best model"] + [f"{pct[m]:.2f}%" for m in self.methods],
        ]))
        excluded = [f"{m}: mape={self.excluded[m]['mape']}, smape={self.excluded[m]['smape']}"
                    for m in self.methods if any(self.excluded[m].values())]
        if excluded:
            lines.append("")
            lines.append("series excluded for undefined metrics: " + "; ".join(excluded))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return "nan" if v is None or not math.isfinite(v) else f"{v:.2f}"


def _fmt_csv(v) -> str:
    return "" if v is None else repr(float(v))


def _fmt_count(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.2f}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out)


def compare(dataset: Dataset, method_forecasts: dict[str, dict[str, np.ndarray]], title: str = "") -> MetricsReport:
    """Average errors, per-metric ranks and times-ranked-best by sMAPE.

    ``method_forecasts`` maps method -> series id -> forecast (the declared
    horizon, compared against the last ``horizon`` values of each series).
    Ranks order methods by average metric, ties broken by the method order
    given. A series where several methods tie on the best sMAPE credits
    each of them an equal share, so the counts always sum to the number of
    series.
    """
    methods = list(method_forecasts)
    if not methods:
        raise ValueError("no methods to compare")
    gaps = []
    for m in methods:
        for s in dataset:
            fc = method_forecasts[m].get(s.id)
            if fc is None:
                gaps.append(f"{m}:{s.id}")
            elif len(fc) != s.horizon:
                gaps.append(f"{m}:{s.id} (got {len(fc)} of {s.horizon} steps)")
    if gaps:
        raise IncompleteComparison(gaps)

    per_series: dict[tuple[str, str], MetricRow] = {}
    best_counts = {m: 0.0 for m in methods}
    for s in dataset:
        actual = s.values[-s.horizon:]
        scores = {}
        for m in methods:
            row = metrics(method_forecasts[m][s.id], actual)
            per_series[(s.id, m)] = row
            scores[m] = row.smape if row.smape is not None else math.inf
        best = min(scores.values())
        winners = [m for m in methods if scores[m] == best]
        for m in winners:
            best_counts[m] += 1.0 / len(winners)

    averages: dict[str, dict[str, float]] = {}
    excluded: dict[str, dict[str, int]] = {}
    for m in methods:
        averages[m], excluded[m] = {}, {"mape": 0, "smape": 0}
        for k in METRICS:
            vals = [per_series[(s.id, m)].get(k) for s in dataset]
            defined = [v for v in vals if v is not None]
            if k in excluded[m]:
                excluded[m][k] = len(vals) - len(defined)
            averages[m][k] = float(np.mean(defined)) if defined else math.nan

    ranks: dict[str, dict[str, int]] = {}
    for k in METRICS:
        key = {m: (averages[m][k] if math.isfinite(averages[m][k]) else math.inf) for m in methods}
        order = sorted(methods, key=lambda m: (key[m], methods.index(m)))
        ranks[k] = {m: i + 1 for i, m in enumerate(order)}
    return MetricsReport(
        methods=methods,
        series_ids=dataset.ids(),
        per_series=per_series,
        averages=averages,
        excluded=excluded,
        ranks=ranks,
        best_counts=best_counts,
        title=title,
    )


# -- forecast files -----------------------------------------------------------


def write_forecasts(forecasts: dict[str, np.ndarray], path, order: list[str] | None = None) -> None:
    """CSV ``id,step,value`` with 1-based steps."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "step", "value"])
        for sid in order or list(forecasts):
            for step, v in enumerate(forecasts[sid], 1):
                writer.writerow([sid, step, repr(float(v))])


def read_forecasts(path) -> dict[str, np.ndarray]:
    rows: dict[str, dict[int, float]] = defaultdict(dict)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:3]] != ["id", "step", "value"]:
            raise DatasetError([f"{path}: header must be id,step,value"])
        for lineno, row in enumerate(reader, 2):
            try:
                rows[row["id"].strip()][int(row["step"])] = float(row["value"])
            except (TypeError, ValueError) as exc:
                raise DatasetError([f"{path}: row {lineno}: {exc}"]) from None
    out = {}
    for sid, steps in rows.items():
        if sorted(steps) != list(range(1, len(steps) + 1)):
            raise DatasetError([f"{path}: series {sid!r} has non-contiguous steps"])
        out[sid] = np.array([steps[k] for k in range(1, len(steps) + 1)])
    return out


def read_method_dir(path) -> dict[str, dict[str, np.ndarray]]:
    """One ``<method>.csv`` forecast file per method."""
    directory = Path(path)
    if not directory.is_dir():
        raise FileNotFoundError(f"methods directory not found: {directory}")
    return {p.stem: read_forecasts(p) for p in sorted(directory.glob("*.csv"))}
