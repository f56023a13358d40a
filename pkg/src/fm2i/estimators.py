"""scikit-learn compatible wrappers around the FM2I pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from ._validation import check_horizon, check_series
from .series import ScalingRecord, prepare, restore_forecast, undifference, unscale
from .transforms import GC_CLAMP_EPS, build
from .tuner import ConfigSpace, ModelConfig, forecast, grid_search, select


def _as_series(y) -> np.ndarray:
    y = np.asarray(getattr(y, "values", y), dtype=np.float64)
    if y.ndim == 2 and 1 in y.shape:
        y = y.ravel()
    return check_series(y, min_length=2)


class SeriesScaler(TransformerMixin, BaseEstimator):
    """Optional differencing followed by min-max scaling onto ``[lo, hi]``.

    ``inverse_transform`` undoes both steps; differenced inputs come back
    anchored at the first fitted value.
    """

    def __init__(self, lo=-1.0, hi=1.0, differenced=False):
        self.lo = lo
        self.hi = hi
        self.differenced = differenced

    def fit(self, y, x=None):
        y = _as_series(y)
        _, self.record_ = prepare(y, self.lo, self.hi, self.differenced)
        self.last_ = float(y[-1])
        return self

    def transform(self, y):
        check_is_fitted(self, "record_")
        y = _as_series(y)
        rec = self.record_
        if rec.differenced:
            y = np.diff(y)
        if rec.constant:
            return np.full(y.shape, 0.5 * (rec.target_lo + rec.target_hi))
        span = rec.observed_max - rec.observed_min
        return rec.target_lo + (y - rec.observed_min) * ((rec.target_hi - rec.target_lo) / span)

    def inverse_transform(self, z):
        check_is_fitted(self, "record_")
        out = unscale(np.asarray(z, dtype=np.float64).ravel(), self.record_)
        if self.record_.differenced:
            out = undifference(out, self.record_.anchor)
        return out

    def restore_forecast(self, z) -> np.ndarray:
        """Map scaled forecasts that continue the fitted series back to original units."""
        check_is_fitted(self, "record_")
        return restore_forecast(z, self.record_, self.last_)

    @property
    def record(self) -> ScalingRecord:
        check_is_fitted(self, "record_")
        return self.record_


class MatrixEncoder(TransformerMixin, BaseEstimator):
    """Series -> square matrix for one transform kind (stateless)."""

    def __init__(self, kind="GASF", clamp_eps=GC_CLAMP_EPS):
        self.kind = kind
        self.clamp_eps = clamp_eps

    def fit(self, y=None, x=None):
        return self

    def transform(self, y):
        return build(self.kind, _as_series(y), self.clamp_eps).data


class FM2IForecaster(BaseEstimator):
    """Forecasting by image inpainting.

    ``fit`` runs the progressive grid search over ``space`` and mines the
    best configuration; ``predict`` forecasts the next ``h`` values of the
    fitted series with it. Passing ``config`` skips the search.

    Parameters
    ----------
    space : ConfigSpace, optional
        Search grid; defaults to :class:`ConfigSpace`.
    config : ModelConfig, optional
        Fixed configuration (no tuning).
    horizon : int
        Pseudo-horizon scored during the search (capped at prefix/3).
    """

    def __init__(self, space=None, config=None, horizon=6):
        self.space = space
        self.config = config
        self.horizon = horizon

    def fit(self, y, x=None):
        y = _as_series(y)
        space = self.space or ConfigSpace()
        self.search_region_ = space.search_region
        if self.config is not None:
            self.config_ = self.config if isinstance(self.config, ModelConfig) else ModelConfig(**self.config)
            self.log_ = None
        else:
            self.log_ = grid_search(y, space, check_horizon(self.horizon, allow_zero=False))
            self.config_ = select(self.log_, space)
        self.y_ = y
        return self

    def predict(self, h=None) -> np.ndarray:
        if not hasattr(self, "config_"):
            raise NotFittedError("FM2IForecaster is not fitted yet; call fit first")
        h = self.horizon if h is None else h
        return forecast(self.y_, self.config_, check_horizon(h), self.search_region_)

    def fit_predict(self, y, h=None) -> np.ndarray:
        return self.fit(y).predict(h)
