"""Input validation helpers shared by the pipeline stages."""

from __future__ import annotations

import numpy as np


class StageError(ValueError):
    """Error raised by a pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.reason = message


def check_series(values, *, min_length: int = 1, name: str = "series") -> np.ndarray:
    """Return ``values`` as a finite 1D float64 array.

    Raises ``ValueError`` when the input is not one-dimensional, holds
    non-finite entries, or is shorter than ``min_length``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"{name} needs at least {min_length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def check_square(matrix, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_in_range(arr: np.ndarray, lo: float, hi: float, name: str = "values", atol: float = 1e-12) -> None:
    if arr.size and (arr.min() < lo - atol or arr.max() > hi + atol):
        raise ValueError(
            f"{name} must lie in [{lo}, {hi}], got [{arr.min():.6g}, {arr.max():.6g}]"
        )


def check_horizon(h, *, allow_zero: bool = True) -> int:
    if isinstance(h, (bool, np.bool_)) or int(h) != h:
        raise ValueError(f"horizon must be an integer, got {h!r}")
    h = int(h)
    if h < 0 or (h == 0 and not allow_zero):
        raise ValueError(f"horizon must be {'non-negative' if allow_zero else 'positive'}, got {h}")
    return h
