"""Series containers, invertible min-max scaling and first differencing."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._validation import check_horizon, check_series


class Period(str, Enum):
    YEARLY = "yearly"
    QUARTERLY = "quarterly"
    MONTHLY = "monthly"
    OTHER = "other"

    @classmethod
    def parse(cls, value) -> "Period":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown period {value!r}") from None


#: Default forecast horizon per sampling period (M3 convention).
DEFAULT_HORIZONS = {
    Period.YEARLY: 6,
    Period.QUARTERLY: 8,
    Period.MONTHLY: 18,
    Period.OTHER: 8,
}


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations ``s_0 .. s_n`` plus metadata.

    ``values`` is stored as a read-only float64 array.
    """

    values: np.ndarray
    id: str = ""
    period: Period = Period.OTHER
    declared_horizon: int | None = None
    category: str = "other"

    def __post_init__(self):
        arr = check_series(self.values, min_length=2).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "period", Period.parse(self.period))
        if self.declared_horizon is not None:
            object.__setattr__(
                self, "declared_horizon", check_horizon(self.declared_horizon, allow_zero=False)
            )

    def __len__(self) -> int:
        return self.values.size

    @property
    def horizon(self) -> int:
        if self.declared_horizon is not None:
            return self.declared_horizon
        return DEFAULT_HORIZONS[self.period]

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(values, self.id, self.period, self.declared_horizon, self.category)


@dataclass(frozen=True)
class ScalingRecord:
    """Everything needed to undo :func:`minmax_scale` (and differencing)."""

    observed_min: float
    observed_max: float
    target_lo: float
    target_hi: float
    differenced: bool = False
    anchor: float = 0.0

    def __post_init__(self):
        if not self.observed_min <= self.observed_max:
            raise ValueError("observed_min must not exceed observed_max")
        if not self.target_lo < self.target_hi:
            raise ValueError("target_lo must be strictly below target_hi")

    @property
    def constant(self) -> bool:
        return self.observed_min == self.observed_max


@dataclass(frozen=True)
class SplitSeries:
    train: np.ndarray
    test: np.ndarray
    source: TimeSeries | None = field(default=None, repr=False)


def _values(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return np.asarray(ts.values, dtype=np.float64)
    return check_series(ts)


def split(ts, h: int) -> SplitSeries:
    """Split off the last ``h`` observations as the test part."""
    values = _values(ts)
    h = check_horizon(h, allow_zero=False)
    if h >= values.size:
        raise ValueError(f"horizon exceeds series: h={h}, length={values.size}")
    return SplitSeries(
        train=values[:-h].copy(),
        test=values[-h:].copy(),
        source=ts if isinstance(ts, TimeSeries) else None,
    )


def minmax_scale(ts, lo: float = -1.0, hi: float = 1.0) -> tuple[np.ndarray, ScalingRecord]:
    """Affinely map ``ts`` onto ``[lo, hi]``.

    A constant series maps every point to the interval midpoint; the record
    keeps ``observed_min == observed_max`` so :func:`unscale` returns the
    constant.

    Returns
    -------
    scaled : ndarray
    record : ScalingRecord
    """
    values = _values(ts)
    if values.size == 0:
        raise ValueError("cannot scale an empty series")
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    vmin, vmax = float(values.min()), float(values.max())
    record = ScalingRecord(vmin, vmax, lo, hi)
    if vmin == vmax:
        return np.full(values.shape, 0.5 * (lo + hi)), record
    scaled = lo + (values - vmin) * ((hi - lo) / (vmax - vmin))
    # pin the extremes so rounding never leaves the interval
    scaled[values == vmin] = lo
    scaled[values == vmax] = hi
    return scaled, record


def unscale(values, record: ScalingRecord) -> np.ndarray:
    """Invert :func:`minmax_scale`. Out-of-range inputs are extrapolated, never clamped."""
    arr = np.asarray(values, dtype=np.float64)
    if record.constant:
        return np.full(arr.shape, record.observed_min)
    span = record.observed_max - record.observed_min
    return record.observed_min + (arr - record.target_lo) * (span / (record.target_hi - record.target_lo))


def difference(ts) -> tuple[np.ndarray, float]:
    """First differences ``s[i+1] - s[i]`` and the anchor ``s[0]``."""
    values = _values(ts)
    if values.size < 2:
        raise ValueError("differencing needs at least 2 values")
    return np.diff(values), float(values[0])


def undifference(diffs, anchor: float) -> np.ndarray:
    """Cumulative sum seeded by ``anchor``; inverse of :func:`difference`."""
    diffs = np.asarray(diffs, dtype=np.float64)
    return np.cumsum(np.concatenate(([float(anchor)], diffs)))


def prepare(values, lo: float, hi: float, differenced: bool = False) -> tuple[np.ndarray, ScalingRecord]:
    """Optionally difference, then min-max scale; the record captures both steps."""
    values = check_series(values, min_length=2 if differenced else 1)
    anchor = 0.0
    if differenced:
        values, anchor = difference(values)
    scaled, rec = minmax_scale(values, lo, hi)
    record = ScalingRecord(rec.observed_min, rec.observed_max, lo, hi, differenced, anchor)
    return scaled, record


def restore_forecast(scaled_forecast, record: ScalingRecord, last_value: float) -> np.ndarray:
    """Map scaled forecasts back to the original units.

    For differenced records the forecasts are increments continuing from
    ``last_value``.
    """
    out = unscale(scaled_forecast, record)
    if record.differenced:
        out = undifference(out, last_value)[1:]
    return out
