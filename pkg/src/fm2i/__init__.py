"""Time-series forecasting by image inpainting.

A series becomes a square matrix (autocorrelation, outer product, angular
field, cosine ratios or relative positions), the matrix becomes an image,
the image grows by the forecast horizon and an exemplar-based inpainter
fills the unknown border. Reading the filled cells back yields the forecast.
"""

__version__ = "0.1.0"

from ._validation import StageError
from .bench import Dataset, MetricsReport, compare, ingest_csv, metrics, naive_forecast
from .estimators import FM2IForecaster, MatrixEncoder, SeriesScaler
from .imaging import EncodingSpec, ImageGrid, Technique, decode, encode
from .inpaint import PatchConfig, inpaint
from .series import Period, ScalingRecord, TimeSeries, minmax_scale, split
from .spectral import autocorr, psd
from .transforms import Kind, MatrixRepr, build, extract_forecast
from .tuner import ConfigSpace, ModelConfig, ModelLog, forecast, grid_search, select, smape

__all__ = [
    "ConfigSpace", "Dataset", "EncodingSpec", "FM2IForecaster", "ImageGrid", "Kind",
    "MatrixEncoder", "MatrixRepr", "MetricsReport", "ModelConfig", "ModelLog", "PatchConfig",
    "Period", "ScalingRecord", "SeriesScaler", "StageError", "Technique", "TimeSeries",
    "autocorr", "build", "compare", "decode", "encode", "extract_forecast", "forecast",
    "grid_search", "ingest_csv", "inpaint", "metrics", "minmax_scale", "naive_forecast",
    "psd", "select", "smape", "split",
]
