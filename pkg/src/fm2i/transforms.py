"""Series-to-matrix representations and the inverse forecast extraction.

Every builder takes an already scaled series ``x_0 .. x_n`` and returns a
:class:`MatrixRepr`. :func:`extend_for_forecast` grows the matrix by the
horizon and masks the L-shaped unknown band; once that band has been
inpainted, :func:`extract_forecast` reads the new series values back out.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.linalg import toeplitz

from ._validation import check_horizon, check_in_range, check_series, check_square
from .series import ScalingRecord, minmax_scale, unscale
from .spectral import autocorr

#: Default clamp applied to the inputs of the generalized-cosine family.
GC_CLAMP_EPS = 0.05
_GC_SINGULAR = 1e-12
_TINY = 1e-9


class Kind(str, Enum):
    STAM = "STAM"
    MAC = "MAC"
    GASF = "GASF"
    GC = "GC"
    GCS1 = "GCS1"
    GCS2 = "GCS2"
    RPM = "RPM"

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown transform kind {value!r}") from None

    @property
    def symmetric(self) -> bool:
        return self not in (Kind.GC, Kind.RPM)

    @property
    def gc_family(self) -> bool:
        return self in (Kind.GC, Kind.GCS1, Kind.GCS2)


class GCClampWarning(UserWarning):
    """Inputs were clipped into ``[eps, 1 - eps]`` before a GC transform."""


@dataclass(frozen=True)
class MatrixRepr:
    kind: Kind
    data: np.ndarray
    source_len: int
    horizon: int = 0

    @property
    def side(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class TransformContext:
    """Matrix-level rescale and clamp needed to undo a transform."""

    kind: Kind
    scaling: ScalingRecord | None = None
    clamp_eps: float = GC_CLAMP_EPS


def _repr(kind: Kind, data: np.ndarray, n: int) -> MatrixRepr:
    return MatrixRepr(kind=kind, data=data, source_len=n)


def to_stam(series) -> MatrixRepr:
    """Symmetric Toeplitz matrix ``gamma(|i - j|)``."""
    s = check_series(series, min_length=2)
    return _repr(Kind.STAM, toeplitz(autocorr(s).gamma), s.size)


def to_mac(series) -> MatrixRepr:
    """Gram matrix ``s_i * s_j``; its k-th diagonal sums to ``(n+1) * gamma(k)``."""
    s = check_series(series, min_length=1)
    return _repr(Kind.MAC, np.outer(s, s), s.size)


def to_gasf(series) -> MatrixRepr:
    """Gramian angular summation field of a series scaled to ``[0, 1]``."""
    x = check_series(series, min_length=1)
    check_in_range(x, 0.0, 1.0, "GASF input")
    x = np.clip(x, 0.0, 1.0)
    root = np.sqrt(1.0 - x * x)
    return _repr(Kind.GASF, np.outer(x, x) - np.outer(root, root), x.size)


def _gc_inputs(series, clamp_eps: float) -> np.ndarray:
    x = check_series(series, min_length=1)
    check_in_range(x, 0.0, 1.0, "GC input")
    clipped = np.clip(x, clamp_eps, 1.0 - clamp_eps)
    if np.any(clipped != x):
        warnings.warn(
            f"GC inputs clipped into [{clamp_eps}, {1 - clamp_eps}]", GCClampWarning, stacklevel=3
        )
    return clipped


def gc_matrix(x: np.ndarray) -> np.ndarray:
    """Generalized cosine ``sin(t_i) / sin(t_i + t_j)`` with ``t = arccos(x)``."""
    x = np.asarray(x, dtype=np.float64)
    root = np.sqrt(1.0 - x * x)
    denom = np.outer(x, root) + np.outer(root, x)
    np.fill_diagonal(denom, 2.0 * x * root)
    bad = np.abs(denom) < _GC_SINGULAR
    # the diagonal has the closed form 1/(2x) even where sin(2t) vanishes
    np.fill_diagonal(bad, np.abs(x) < _GC_SINGULAR)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"GC singularity at ({i}, {j})")
    with np.errstate(divide="ignore", invalid="ignore"):
        data = root[:, None] / denom
    np.fill_diagonal(data, 1.0 / (2.0 * x))
    return data


def to_gc(series, clamp_eps: float = GC_CLAMP_EPS) -> MatrixRepr:
    """Generalized cosine matrix; not symmetric in general."""
    x = _gc_inputs(series, clamp_eps)
    return _repr(Kind.GC, gc_matrix(x), x.size)


def to_gcs1(series, clamp_eps: float = GC_CLAMP_EPS) -> MatrixRepr:
    gc = to_gc(series, clamp_eps).data
    return _repr(Kind.GCS1, 0.5 * (gc + gc.T), gc.shape[0])


def to_gcs2(series, clamp_eps: float = GC_CLAMP_EPS) -> MatrixRepr:
    """Upper triangle mirrored from the lower one; GC diagonal kept."""
    gc = to_gc(series, clamp_eps).data
    data = np.tril(gc) + np.tril(gc, -1).T
    return _repr(Kind.GCS2, data, gc.shape[0])


def to_rpm(series, rescale: bool = True) -> MatrixRepr:
    """Relative position matrix ``(z_i - z_j + 1) / 2``.

    ``z`` is the series min-max scaled to ``[0, 1]``; pass ``rescale=False``
    when the input already lives there, which keeps the matrix invertible
    for values added later.
    """
    s = check_series(series, min_length=2)
    if rescale:
        z, _ = minmax_scale(s, 0.0, 1.0)
    else:
        check_in_range(s, 0.0, 1.0, "RPM input")
        z = s
    return _repr(Kind.RPM, 0.5 * (z[:, None] - z[None, :] + 1.0), s.size)


def build(kind, series, clamp_eps: float = GC_CLAMP_EPS) -> MatrixRepr:
    """Dispatch to the builder for ``kind`` (RPM without internal rescale)."""
    kind = Kind.parse(kind)
    if kind is Kind.STAM:
        return to_stam(series)
    if kind is Kind.MAC:
        return to_mac(series)
    if kind is Kind.GASF:
        return to_gasf(series)
    if kind is Kind.GC:
        return to_gc(series, clamp_eps)
    if kind is Kind.GCS1:
        return to_gcs1(series, clamp_eps)
    if kind is Kind.GCS2:
        return to_gcs2(series, clamp_eps)
    return to_rpm(series, rescale=False)


def rescale(m: MatrixRepr, clamp_eps: float = GC_CLAMP_EPS) -> tuple[MatrixRepr, TransformContext]:
    """Min-max the matrix entries into ``[0, 1]`` for image encoding."""
    scaled, record = minmax_scale(m.data.ravel(), 0.0, 1.0)
    out = replace(m, data=scaled.reshape(m.data.shape))
    return out, TransformContext(kind=m.kind, scaling=record, clamp_eps=clamp_eps)


def extend_for_forecast(m: MatrixRepr, h: int, fill: float = 0.0) -> tuple[MatrixRepr, np.ndarray]:
    """Pad ``m`` by ``h`` rows and columns.

    Returns the grown matrix and a boolean mask that is True on the known
    block and False on the L-shaped forecast band.
    """
    h = check_horizon(h)
    data = check_square(m.data)
    side = data.shape[0]
    grown = np.full((side + h, side + h), float(fill))
    grown[:side, :side] = data
    mask = np.zeros(grown.shape, dtype=bool)
    mask[:side, :side] = True
    return replace(m, data=grown, horizon=m.horizon + h), mask


# -- forecast extraction ------------------------------------------------------

ESTIMATORS = {
    Kind.STAM: ("backsub",),
    Kind.MAC: ("lsq", "diagonal"),
    Kind.GASF: ("median", "diagonal"),
    Kind.GC: ("diagonal", "cross"),
    Kind.GCS1: ("diagonal", "cross"),
    Kind.GCS2: ("diagonal", "cross"),
    Kind.RPM: ("median", "mean"),
}


def _resolve_estimator(kind: Kind, estimator: str) -> str:
    if estimator in ("auto", None):
        return ESTIMATORS[kind][0]
    if estimator not in ESTIMATORS[kind]:
        raise ValueError(f"estimator {estimator!r} not available for {kind.value}")
    return estimator


def _extract_mac(data, x, n1, h, estimator, paths):
    out = np.empty(h)
    energy = float(np.dot(x, x))
    degenerate = bool(np.all(np.abs(x) < _TINY))
    for step in range(h):
        f = n1 + step
        diag = np.sqrt(max(data[f, f], 0.0))
        if estimator == "lsq" and not degenerate:
            out[step] = np.dot(x, data[:n1, f]) / energy
            paths.append("lsq")
        else:
            sign = 1.0
            if not degenerate:
                sign = 1.0 if np.dot(x, data[:n1, f]) >= 0 else -1.0
            out[step] = sign * diag
            paths.append("diagonal")
    return out


def _extract_gasf(data, x, n1, h, estimator, paths):
    theta = np.arccos(np.clip(x, 0.0, 1.0))
    out = np.empty(h)
    for step in range(h):
        f = n1 + step
        diag = np.cos(0.5 * np.arccos(np.clip(data[f, f], -1.0, 1.0)))
        if estimator == "diagonal":
            out[step] = diag
            paths.append("diagonal")
            continue
        col = np.arccos(np.clip(data[:n1, f], -1.0, 1.0))
        candidates = np.cos(col - theta)
        # the diagonal breaks ties between the two middle candidates
        out[step] = np.median(np.append(candidates, diag))
        paths.append("median")
    return np.clip(out, 0.0, 1.0)


def _gc_cross_candidates(kind, data, theta, f, n1, eps):
    if kind is Kind.GCS1:
        # (sin t_f + sin t_i) = 2m sin(t_f + t_i)  <=>  A sin t_f + B cos t_f = C
        m = data[f, :n1]
        a = 1.0 - 2.0 * m * np.cos(theta)
        b = -2.0 * m * np.sin(theta)
        c = -np.sin(theta)
        r = np.hypot(a, b)
        phi = np.arctan2(b, a)
        ok = r > _TINY
        ratio = np.clip(np.where(ok, c / np.where(ok, r, 1.0), 2.0), -1.0, 1.0)
        base = np.arcsin(ratio)
        roots = np.concatenate([base - phi, np.pi - base - phi])
        roots = np.mod(roots + np.pi, 2.0 * np.pi) - np.pi
        ok2 = np.concatenate([ok, ok])
        valid = ok2 & (roots > 0) & (roots < np.pi / 2)
        return np.cos(roots[valid])
    # GC and GCS2 share the lower triangle: M[f, i] = sin(t_f) / sin(t_f + t_i)
    row = data[f, :n1]
    t_f = np.arctan2(row * np.sin(theta), 1.0 - row * np.cos(theta))
    valid = (t_f > 0) & (t_f < np.pi / 2)
    return np.cos(t_f[valid])


def _gc_row_model(kind, t_f, theta):
    if kind is Kind.GCS1:
        return (np.sin(t_f) + np.sin(theta)) / (2.0 * np.sin(t_f + theta))
    return np.sin(t_f) / np.sin(t_f + theta)


def _gc_consensus(kind, cands, row, theta):
    """Candidate whose implied row best matches the known row (median residual)."""
    cands = np.unique(cands)
    t = np.arccos(cands)
    resid = np.abs(_gc_row_model(kind, t[:, None], theta[None, :]) - row[None, :])
    score = np.median(resid, axis=1)
    return float(cands[np.argmin(score)])


def _extract_gc(kind, data, x, n1, h, estimator, eps, paths):
    lo, hi = eps, 1.0 - eps
    theta = np.arccos(np.clip(x, lo, hi))
    out = np.empty(h)
    for step in range(h):
        f = n1 + step
        d = data[f, f]
        diag = 1.0 / (2.0 * d) if abs(d) > _TINY else np.inf
        if estimator == "diagonal" and lo - 1e-12 <= diag <= hi + 1e-12:
            out[step] = diag
            paths.append("diagonal")
            continue
        cands = _gc_cross_candidates(kind, data, theta, f, n1, eps)
        if cands.size:
            out[step] = _gc_consensus(kind, cands, data[f, :n1], theta)
            paths.append("cross")
        else:
            out[step] = diag
            paths.append("diagonal")
    return np.clip(out, lo, hi)


def _extract_rpm(data, x, n1, h, estimator, paths):
    out = np.empty(h)
    agg = np.median if estimator == "median" else np.mean
    for step in range(h):
        f = n1 + step
        out[step] = agg(2.0 * data[f, :n1] - 1.0 + x)
        paths.append(estimator)
    return out


def _extract_stam(data, x, n1, h, paths):
    side = data.shape[0]
    last = float(x[-1])
    if abs(x[0]) < _TINY or h - 1 > n1 - 1:
        paths.extend(["constant"] * h)
        return np.full(h, last)
    # gamma estimates for the new lags, averaged along both extended diagonals
    gamma = {k: 0.5 * (np.diagonal(data, k).mean() + np.diagonal(data, -k).mean())
             for k in range(n1, side)}
    full = np.concatenate([x, np.zeros(h)])
    for k in range(side - 1, n1 - 1, -1):
        tail = np.dot(full[k + 1:side], full[1:side - k])
        full[k] = (side * gamma[k] - tail) / x[0]
    paths.extend(["backsub"] * h)
    return full[n1:]


def extract_forecast(
    m: MatrixRepr,
    ctx: TransformContext | None,
    known,
    h: int,
    estimator: str = "auto",
    return_paths: bool = False,
):
    """Read ``h`` forecast values (scaled space) from an inpainted matrix.

    Parameters
    ----------
    m
        Filled matrix of side ``len(known) + h``, in the encoded ``[0, 1]``
        space when ``ctx.scaling`` is set, raw otherwise.
    ctx
        Context returned by :func:`rescale`; ``None`` for raw matrices.
    known
        The scaled series the matrix was built from.
    h
        Number of values to extract.
    estimator
        ``"auto"`` picks the first entry of ``ESTIMATORS[kind]``.
    return_paths
        Also return the estimator path taken for each step.
    """
    h = check_horizon(h)
    x = check_series(known, min_length=1)
    kind = Kind.parse(m.kind)
    if h == 0:
        empty = np.empty(0)
        return (empty, []) if return_paths else empty
    data = check_square(m.data)
    n1 = x.size
    if data.shape[0] != n1 + h:
        raise ValueError(f"matrix side {data.shape[0]} != len(known) + h = {n1 + h}")
    eps = GC_CLAMP_EPS if ctx is None else ctx.clamp_eps
    if ctx is not None and ctx.scaling is not None:
        data = unscale(data, ctx.scaling)
    estimator = _resolve_estimator(kind, estimator)
    paths: list[str] = []
    if kind is Kind.MAC:
        out = _extract_mac(data, x, n1, h, estimator, paths)
    elif kind is Kind.GASF:
        out = _extract_gasf(data, x, n1, h, estimator, paths)
    elif kind.gc_family:
        out = _extract_gc(kind, data, x, n1, h, estimator, eps, paths)
    elif kind is Kind.RPM:
        out = _extract_rpm(data, x, n1, h, estimator, paths)
    else:
        out = _extract_stam(data, x, n1, h, paths)
    return (out, paths) if return_paths else out


def dump_csv(m: MatrixRepr | np.ndarray, path) -> None:
    """Row-major, comma-separated, 17 significant digits."""
    data = m.data if isinstance(m, MatrixRepr) else np.asarray(m)
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


def load_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
