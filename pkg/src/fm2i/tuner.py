"""Grid search over pipeline configurations and best-model mining.

The search runs every configuration on growing prefixes of the training
series (progressive exploration), scores the next few known values with
sMAPE, and appends the results to a :class:`ModelLog`. The best model is
then mined from the log by frequent-items counting, optionally restricted
to the most recent prefixes (short memory).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from ._validation import StageError, check_horizon, check_series
from .imaging import EncodingSpec, Technique, decode, encode
from .inpaint import PatchConfig, inpaint
from .series import prepare, restore_forecast
from .transforms import ESTIMATORS, GC_CLAMP_EPS, Kind, MatrixRepr, build, extend_for_forecast, extract_forecast, rescale

#: Series bounds each transform is allowed to search.
DEFAULT_BOUNDS = {
    Kind.STAM: ((-1.0, 1.0),),
    Kind.MAC: ((-1.0, 1.0), (0.0, 1.0)),
    Kind.GASF: ((0.0, 1.0),),
    Kind.GC: ((GC_CLAMP_EPS, 1.0 - GC_CLAMP_EPS),),
    Kind.GCS1: ((GC_CLAMP_EPS, 1.0 - GC_CLAMP_EPS),),
    Kind.GCS2: ((GC_CLAMP_EPS, 1.0 - GC_CLAMP_EPS),),
    Kind.RPM: ((0.0, 1.0),),
}

TOP_K = 3
MIN_PREFIX = 12
LOG_HEADER = ["prefix_len", "transform", "differenced", "series_lo", "series_hi", "patch", "estimator", "smape", "flag"]


@dataclass(frozen=True)
class ModelConfig:
    kind: Kind = Kind.GASF
    differenced: bool = False
    series_lo: float = 0.0
    series_hi: float = 1.0
    patch_size: int = 3
    encoding: Technique = Technique.DYNAMIC
    estimator: str = "auto"
    matrix_lo: float = 0.0
    matrix_hi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        object.__setattr__(self, "encoding", Technique.parse(self.encoding))
        kind = self.kind
        bounds = (self.series_lo, self.series_hi)
        if kind is Kind.GASF and bounds != (0.0, 1.0):
            raise ValueError("GASF requires series bounds [0, 1]")
        if kind.gc_family and bounds != (GC_CLAMP_EPS, 1.0 - GC_CLAMP_EPS):
            raise ValueError(f"{kind.value} requires series bounds [{GC_CLAMP_EPS}, {1 - GC_CLAMP_EPS}]")
        if kind is Kind.RPM and not (0.0 <= self.series_lo < self.series_hi <= 1.0):
            raise ValueError("RPM requires series bounds inside [0, 1]")
        if self.estimator != "auto" and self.estimator not in ESTIMATORS[kind]:
            raise ValueError(f"estimator {self.estimator!r} not available for {kind.value}")
        PatchConfig(self.patch_size)

    @property
    def sort_key(self) -> tuple:
        order = list(Kind).index(self.kind)
        return (order, self.differenced, self.series_lo, self.series_hi, self.patch_size,
                list(Technique).index(self.encoding), self.estimator)

    def label(self) -> str:
        diff = "diff" if self.differenced else "raw"
        return (f"{self.kind.value}/{diff}/[{self.series_lo:g},{self.series_hi:g}]"
                f"/p{self.patch_size}/{self.encoding.value}/{self.estimator}")

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if hasattr(v, "value") else v
        return out


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split_list(text: str) -> list[str]:
    return [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]


@dataclass(frozen=True)
class ConfigSpace:
    """The grid explored by :func:`grid_search`.

    Series bounds come from ``DEFAULT_BOUNDS`` unless ``bounds`` overrides
    them for every kind; overrides incompatible with a kind are skipped.
    """

    kinds: tuple[Kind, ...] = tuple(Kind)
    differenced: tuple[bool, ...] = (False, True)
    patch_sizes: tuple[int, ...] = (3, 5, 7, 9, 11)
    encodings: tuple[Technique, ...] = (Technique.DYNAMIC,)
    estimators: tuple[str, ...] = ("auto",)
    bounds: tuple[tuple[float, float], ...] | None = None
    min_prefix: int = MIN_PREFIX
    search_region: str = "band"
    strategy: str = "frequent"
    window: int = 5
    top_k: int = TOP_K
    prefix_step: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(Kind.parse(k) for k in self.kinds))
        object.__setattr__(self, "encodings", tuple(Technique.parse(e) for e in self.encodings))
        if self.strategy not in ("frequent", "short_memory"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.min_prefix < 3 or self.window < 1 or self.top_k < 1 or self.prefix_step < 1:
            raise ValueError("min_prefix >= 3, window >= 1, top_k >= 1 and prefix_step >= 1 required")

    def configs(self) -> list[ModelConfig]:
        out = []
        for kind in self.kinds:
            bounds = self.bounds if self.bounds is not None else DEFAULT_BOUNDS[kind]
            for (lo, hi), diff, patch, enc, est in itertools.product(
                bounds, self.differenced, self.patch_sizes, self.encodings, self.estimators
            ):
                try:
                    out.append(ModelConfig(kind, diff, lo, hi, patch, enc, est))
                except ValueError:
                    continue
        return sorted(set(out), key=lambda c: c.sort_key)

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ConfigSpace":
        kw: dict = {}
        for key, raw in mapping.items():
            if key in ("kinds", "kind", "transform", "transforms"):
                kw["kinds"] = tuple(_split_list(raw))
            elif key == "differenced":
                kw["differenced"] = tuple(_parse_bool(v) for v in _split_list(raw))
            elif key in ("patch_sizes", "patch_size", "patch"):
                kw["patch_sizes"] = tuple(int(v) for v in _split_list(raw))
            elif key in ("encodings", "encoding"):
                kw["encodings"] = tuple(_split_list(raw))
            elif key in ("estimators", "estimator"):
                kw["estimators"] = tuple(_split_list(raw))
            elif key in ("bounds", "series_bounds"):
                pairs = []
                for item in raw.split(";"):
                    lo, hi = (float(v) for v in item.strip().strip("[]()").split(","))
                    pairs.append((lo, hi))
                kw["bounds"] = tuple(pairs)
            elif key in ("min_prefix", "window", "top_k", "prefix_step"):
                kw[key] = int(raw)
            elif key in ("search_region", "strategy"):
                kw[key] = raw.strip()
            else:
                raise ValueError(f"unknown config key {key!r}")
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "ConfigSpace":
        return cls.from_mapping(read_key_values(Path(path).read_text()))

    def to_text(self) -> str:
        lines = [
            f"kinds = {', '.join(k.value for k in self.kinds)}",
            f"differenced = {', '.join(str(d).lower() for d in self.differenced)}",
            f"patch_sizes = {', '.join(str(p) for p in self.patch_sizes)}",
            f"encodings = {', '.join(e.value for e in self.encodings)}",
            f"estimators = {', '.join(self.estimators)}",
        ]
        if self.bounds is not None:
            lines.append("bounds = " + "; ".join(f"{lo:g},{hi:g}" for lo, hi in self.bounds))
        lines += [
            f"min_prefix = {self.min_prefix}",
            f"search_region = {self.search_region}",
            f"strategy = {self.strategy}",
            f"window = {self.window}",
            f"top_k = {self.top_k}",
            f"prefix_step = {self.prefix_step}",
        ]
        return "\n".join(lines) + "\n"


def read_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


# -- pipeline -----------------------------------------------------------------


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise StageError(name, str(exc)) from exc


def forecast(series, cfg: ModelConfig, h: int, search_region: str = "band") -> np.ndarray:
    """Run the full pipeline once and return ``h`` forecasts in original units.

    scale (+difference) -> matrix -> rescale -> encode -> extend + mask ->
    inpaint -> decode -> extract -> undo scalings. Failures raise
    :class:`StageError` naming the stage.
    """
    h = check_horizon(h)
    values = _stage("scale", check_series, series, min_length=2)
    if h == 0:
        return np.empty(0)
    x, record = _stage("scale", prepare, values, cfg.series_lo, cfg.series_hi, cfg.differenced)
    matrix = _stage("transform", build, cfg.kind, x)
    scaled, ctx = _stage("transform", rescale, matrix)
    spec = EncodingSpec(cfg.encoding, cfg.matrix_lo, cfg.matrix_hi)
    image = _stage("encode", encode, scaled.data, spec)
    carried = MatrixRepr(scaled.kind, decode(image, spec), scaled.source_len)
    grown, mask = _stage("extend", extend_for_forecast, carried, h)
    filled = _stage("inpaint", inpaint, grown.data, mask, PatchConfig(cfg.patch_size, search_region))
    image = _stage("decode", encode, np.clip(filled, cfg.matrix_lo, cfg.matrix_hi), spec)
    decoded = MatrixRepr(grown.kind, decode(image, spec), grown.source_len, grown.horizon)
    out = _stage("extract", extract_forecast, decoded, ctx, x, h, cfg.estimator)
    result = _stage("rescale", restore_forecast, out, record, float(values[-1]))
    if not np.all(np.isfinite(result)):
        raise StageError("rescale", "non-finite forecast")
    return result


def smape(forecast_values, actual) -> float:
    """sMAPE in percent; terms with ``|F| + |A| == 0`` count as zero error."""
    f = np.asarray(forecast_values, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    denom = np.abs(f) + np.abs(a)
    terms = np.divide(np.abs(f - a), denom, out=np.zeros_like(denom), where=denom > 0)
    return float(200.0 * terms.mean())


# -- model log ----------------------------------------------------------------


class LogRow(NamedTuple):
    prefix_len: int
    config: ModelConfig
    smape: float
    rank: int
    flag: str = ""


@dataclass
class ModelLog:
    rows: list[LogRow] = field(default_factory=list)

    def extend_prefix(self, prefix_len: int, scored: Iterable[tuple[ModelConfig, float, str]]) -> None:
        """Commit one prefix's results, ranked by sMAPE (stable on config order)."""
        ordered = sorted(scored, key=lambda item: (item[1], item[0].sort_key))
        for rank, (cfg, score, flag) in enumerate(ordered, 1):
            self.rows.append(LogRow(prefix_len, cfg, score, rank, flag))
        self.rows.sort(key=lambda r: (r.prefix_len, r.smape, r.config.sort_key))

    @property
    def prefixes(self) -> list[int]:
        return sorted({r.prefix_len for r in self.rows})

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for r in self.rows:
            c = r.config
            writer.writerow([
                r.prefix_len, c.kind.value, str(c.differenced).lower(), repr(c.series_lo),
                repr(c.series_hi), c.patch_size, c.estimator, repr(r.smape), r.flag,
            ])
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def read(cls, path, encoding: Technique = Technique.DYNAMIC) -> "ModelLog":
        log = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != LOG_HEADER:
                raise ValueError(f"unexpected model log header {reader.fieldnames}")
            grouped: dict[int, list] = defaultdict(list)
            for row in reader:
                cfg = ModelConfig(
                    row["transform"], row["differenced"] == "true", float(row["series_lo"]),
                    float(row["series_hi"]), int(row["patch"]), encoding, row["estimator"],
                )
                grouped[int(row["prefix_len"])].append((cfg, float(row["smape"]), row["flag"]))
        for prefix in sorted(grouped):
            log.extend_prefix(prefix, grouped[prefix])
        return log


def pseudo_horizon(h: int, prefix_len: int) -> int:
    return max(1, min(h, prefix_len // 3))


def prefix_lengths(n: int, h: int, min_prefix: int = MIN_PREFIX, step: int = 1) -> list[int]:
    """Prefix lengths whose pseudo-horizon window still fits in ``n`` values."""
    return [p for p in range(min_prefix, n, step) if p + pseudo_horizon(h, p) <= n]


def evaluate(values: np.ndarray, prefix_len: int, cfg: ModelConfig, h: int, search_region: str):
    """Score one config on one prefix: ``(smape, flag)``."""
    ph = pseudo_horizon(h, prefix_len)
    try:
        out = forecast(values[:prefix_len], cfg, ph, search_region)
    except StageError as exc:
        return math.inf, f"infeasible:{exc.stage}"
    return smape(out, values[prefix_len:prefix_len + ph]), ""


def grid_search(train, space: ConfigSpace | None = None, pseudo_h: int = 6) -> ModelLog:
    """Progressive exploration of ``space`` over the prefixes of ``train``."""
    space = space or ConfigSpace()
    values = check_series(train, min_length=2)
    pseudo_h = check_horizon(pseudo_h, allow_zero=False)
    prefixes = prefix_lengths(values.size, pseudo_h, space.min_prefix, space.prefix_step)
    if not prefixes:
        # series shorter than min_prefix + horizon: explore the longest prefix that fits
        prefixes = prefix_lengths(values.size, pseudo_h, 3)[-1:]
    if not prefixes:
        raise ValueError(
            f"train length {values.size} too short for min_prefix={space.min_prefix} "
            f"and pseudo horizon {pseudo_h}"
        )
    configs = space.configs()
    if not configs:
        raise ValueError("config space is empty")
    log = ModelLog()
    for p in prefixes:
        scored = []
        for cfg in configs:
            score, flag = evaluate(values, p, cfg, pseudo_h, space.search_region)
            scored.append((cfg, score, flag))
        log.extend_prefix(p, scored)
    return log


# -- best-model mining --------------------------------------------------------


class NoFeasibleModel(ValueError):
    pass


def _frequent(rows: list[LogRow], k: int) -> ModelConfig:
    finite = [r for r in rows if math.isfinite(r.smape)]
    if not finite:
        raise NoFeasibleModel("no feasible model")
    by_prefix: dict[int, list[LogRow]] = defaultdict(list)
    for r in finite:
        by_prefix[r.prefix_len].append(r)
    counts: dict[ModelConfig, int] = defaultdict(int)
    wins: dict[ModelConfig, int] = defaultdict(int)
    scores: dict[ModelConfig, list[float]] = defaultdict(list)
    for prefix_rows in by_prefix.values():
        prefix_rows.sort(key=lambda r: (r.smape, r.config.sort_key))
        for pos, r in enumerate(prefix_rows[:k]):
            counts[r.config] += 1
            scores[r.config].append(r.smape)
            if pos == 0:
                wins[r.config] += 1
    return min(
        counts,
        key=lambda c: (-counts[c], -wins[c], float(np.mean(scores[c])), c.sort_key),
    )


def select_frequent(log: ModelLog, k: int = TOP_K) -> ModelConfig:
    """Most frequent config among the top ``k`` of every prefix.

    Ties fall to the config ranked first more often, then to the lower mean
    sMAPE of its top-``k`` appearances, then to config order.
    """
    return _frequent(log.rows, k)


def select_short_memory(log: ModelLog, window: int, k: int = TOP_K) -> ModelConfig:
    """:func:`select_frequent` restricted to the last ``window`` prefixes."""
    if window < 1:
        raise ValueError("window must be >= 1")
    keep = set(log.prefixes[-window:])
    return _frequent([r for r in log.rows if r.prefix_len in keep], k)


def select(log: ModelLog, space: ConfigSpace) -> ModelConfig:
    if space.strategy == "short_memory":
        return select_short_memory(log, space.window, space.top_k)
    return select_frequent(log, space.top_k)


def oracle_best(train, test, space: ConfigSpace | None = None) -> tuple[ModelConfig, float]:
    """Config with the lowest sMAPE on the held-out ``test`` (diagnostics only)."""
    space = space or ConfigSpace()
    train = check_series(train, min_length=2)
    test = check_series(test, min_length=1)
    best, best_score = None, math.inf
    for cfg in space.configs():
        try:
            score = smape(forecast(train, cfg, test.size, space.search_region), test)
        except StageError:
            continue
        if score < best_score:
            best, best_score = cfg, score
    if best is None:
        raise NoFeasibleModel("no feasible model")
    return best, best_score
