"""Exemplar-based inpainting adapted to extrapolate from image borders.

Greedy Criminisi-style fill: the front cell with the highest
confidence x data priority is filled by copying the best-matching fully
known patch (normalized SSD over the known overlap). Target patches that
cross the image border are clipped, so the L-shaped forecast band along
the last rows and columns is completed from a partial neighbourhood.

The per-step kernels are compiled with numba; the public single-step
helpers (:func:`priority`, :func:`best_patch`) call the same kernels as
the fill loop.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

DATA_FLOOR = 0.001


class InsufficientContext(ValueError):
    """The known region cannot supply a single source patch."""


@dataclass(frozen=True)
class PatchConfig:
    patch_size: int = 3
    search_region: str = "band"
    band_width: int | None = None

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError(f"patch_size must be an odd integer >= 3, got {self.patch_size}")
        if self.search_region not in ("band", "full_known"):
            raise ValueError(f"unknown search_region {self.search_region!r}")
        if self.band_width is None:
            object.__setattr__(self, "band_width", 4 * self.patch_size)
        if self.band_width < self.patch_size:
            raise ValueError("band_width must be at least patch_size")

    @property
    def half(self) -> int:
        return self.patch_size // 2


class Rect(NamedTuple):
    r0: int
    r1: int
    c0: int
    c1: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.r1 - self.r0, self.c1 - self.c0

    def slices(self) -> tuple[slice, slice]:
        return slice(self.r0, self.r1), slice(self.c0, self.c1)


class FillStep(NamedTuple):
    step: int
    target: tuple[int, int]
    rect: Rect
    source: tuple[int, int]
    ssd: float
    priority: float


@dataclass
class FillState:
    values: np.ndarray
    mask: np.ndarray
    confidence: np.ndarray
    fill_order_log: list[FillStep] = field(default_factory=list)

    @classmethod
    def start(cls, values, mask) -> "FillState":
        values = np.array(values, dtype=np.float64)
        mask = np.array(mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise ValueError("values and mask must be 2D arrays of the same shape")
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("known values must be finite")
        values[~mask] = 0.0
        return cls(values=values, mask=mask, confidence=mask.astype(np.float64))


def patch_rect(cell: tuple[int, int], shape: tuple[int, int], half: int) -> Rect:
    """Patch around ``cell`` clipped to the image."""
    r, c = cell
    return Rect(max(r - half, 0), min(r + half + 1, shape[0]), max(c - half, 0), min(c + half + 1, shape[1]))


# -- compiled kernels ----------------------------------------------------------


@njit(cache=True)
def _is_front(mask, r, c):
    if mask[r, c]:
        return False
    h, w = mask.shape
    return (
        (r > 0 and mask[r - 1, c])
        or (r + 1 < h and mask[r + 1, c])
        or (c > 0 and mask[r, c - 1])
        or (c + 1 < w and mask[r, c + 1])
    )


@njit(cache=True)
def _known_grad(values, mask, r, c):
    """Central difference on known neighbours, one-sided at gaps."""
    h, w = mask.shape
    up = r > 0 and mask[r - 1, c]
    down = r + 1 < h and mask[r + 1, c]
    if up and down:
        gr = 0.5 * (values[r + 1, c] - values[r - 1, c])
    elif down:
        gr = values[r + 1, c] - values[r, c]
    elif up:
        gr = values[r, c] - values[r - 1, c]
    else:
        gr = 0.0
    left = c > 0 and mask[r, c - 1]
    right = c + 1 < w and mask[r, c + 1]
    if left and right:
        gc = 0.5 * (values[r, c + 1] - values[r, c - 1])
    elif right:
        gc = values[r, c + 1] - values[r, c]
    elif left:
        gc = values[r, c] - values[r, c - 1]
    else:
        gc = 0.0
    return gr, gc


@njit(cache=True)
def _mask_grad(mask, r, c, axis):
    n = mask.shape[axis]
    i = r if axis == 0 else c
    if n < 2:
        return 0.0
    if i == 0:
        a, b, scale = 0, 1, 1.0
    elif i == n - 1:
        a, b, scale = n - 2, n - 1, 1.0
    else:
        a, b, scale = i - 1, i + 1, 0.5
    if axis == 0:
        hi, lo = mask[b, c], mask[a, c]
    else:
        hi, lo = mask[r, b], mask[r, a]
    return scale * ((1.0 if hi else 0.0) - (1.0 if lo else 0.0))


@njit(cache=True)
def _cell_priority(values, mask, conf, half, r, c):
    h, w = mask.shape
    r0, r1 = max(r - half, 0), min(r + half + 1, h)
    c0, c1 = max(c - half, 0), min(c + half + 1, w)
    total = 0.0
    for i in range(r0, r1):
        for j in range(c0, c1):
            if mask[i, j]:
                total += conf[i, j]
    confidence = total / ((r1 - r0) * (c1 - c0))

    # isophote: known-cell gradient averaged over the 3x3 neighbourhood
    sgr, sgc, count = 0.0, 0.0, 0
    for i in range(max(r - 1, 0), min(r + 2, h)):
        for j in range(max(c - 1, 0), min(c + 2, w)):
            if mask[i, j]:
                gr, gc = _known_grad(values, mask, i, j)
                sgr += gr
                sgc += gc
                count += 1
    if count > 0:
        sgr /= count
        sgc /= count
    nr = _mask_grad(mask, r, c, 0)
    nc = _mask_grad(mask, r, c, 1)
    norm = np.sqrt(nr * nr + nc * nc)
    if norm > 0:
        nr /= norm
        nc /= norm
    data = abs(-sgr * nc + sgc * nr)
    if data < DATA_FLOOR:
        data = DATA_FLOOR
    return confidence * data


@njit(cache=True)
def _priority_map(values, mask, conf, half):
    h, w = mask.shape
    out = np.full((h, w), -1.0)
    for r in range(h):
        for c in range(w):
            if _is_front(mask, r, c):
                out[r, c] = _cell_priority(values, mask, conf, half, r, c)
    return out


@njit(cache=True)
def _unknown_integral(mask):
    h, w = mask.shape
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    for i in range(h):
        row = 0
        for j in range(w):
            if not mask[i, j]:
                row += 1
            integral[i + 1, j + 1] = integral[i, j + 1] + row
    return integral


@njit(cache=True)
def _search(values, mask, integral, r0, r1, c0, c1, tr, tc, band, band_width):
    """Best fully known source corner; returns (row, col, ssd), row -1 if none."""
    h, w = mask.shape
    ph, pw = r1 - r0, c1 - c0
    dr, dc = tr - r0, tc - c0
    overlap = 0
    for k in range(ph):
        for l in range(pw):
            if mask[r0 + k, c0 + l]:
                overlap += 1
    best_r, best_c, best = -1, -1, np.inf
    for i in range(h - ph + 1):
        if band and abs(i + dr - tr) > band_width:
            continue
        for j in range(w - pw + 1):
            if band and abs(j + dc - tc) > band_width:
                continue
            holes = integral[i + ph, j + pw] - integral[i, j + pw] - integral[i + ph, j] + integral[i, j]
            if holes != 0:
                continue
            total = 0.0
            for k in range(ph):
                for l in range(pw):
                    if mask[r0 + k, c0 + l]:
                        d = values[i + k, j + l] - values[r0 + k, c0 + l]
                        total += d * d
            ssd = total / overlap
            if ssd < best:
                best, best_r, best_c = ssd, i, j
    return best_r, best_c, best


@njit(cache=True)
def _best_patch(values, mask, half, tr, tc, band, band_width):
    h, w = mask.shape
    r0, r1 = max(tr - half, 0), min(tr + half + 1, h)
    c0, c1 = max(tc - half, 0), min(tc + half + 1, w)
    integral = _unknown_integral(mask)
    br, bc, ssd = _search(values, mask, integral, r0, r1, c0, c1, tr, tc, band, band_width)
    if br < 0 and band:
        br, bc, ssd = _search(values, mask, integral, r0, r1, c0, c1, tr, tc, False, band_width)
    return br, bc, ssd


@njit(cache=True)
def _fill(values, mask, conf, half, band, band_width, log_int, log_float):
    h, w = mask.shape
    step = 0
    while True:
        best_p, tr, tc = -1.0, -1, -1
        for r in range(h):
            for c in range(w):
                if _is_front(mask, r, c):
                    p = _cell_priority(values, mask, conf, half, r, c)
                    if p > best_p:
                        best_p, tr, tc = p, r, c
        if tr < 0:
            return step
        br, bc, ssd = _best_patch(values, mask, half, tr, tc, band, band_width)
        if br < 0:
            return -1
        r0, r1 = max(tr - half, 0), min(tr + half + 1, h)
        c0, c1 = max(tc - half, 0), min(tc + half + 1, w)
        total = 0.0
        for i in range(r0, r1):
            for j in range(c0, c1):
                if mask[i, j]:
                    total += conf[i, j]
        fill_conf = total / ((r1 - r0) * (c1 - c0))
        for i in range(r0, r1):
            for j in range(c0, c1):
                if not mask[i, j]:
                    values[i, j] = values[br + i - r0, bc + j - c0]
                    conf[i, j] = fill_conf
                    mask[i, j] = True
        log_int[step, 0] = tr
        log_int[step, 1] = tc
        log_int[step, 2] = r0
        log_int[step, 3] = r1
        log_int[step, 4] = c0
        log_int[step, 5] = c1
        log_int[step, 6] = br
        log_int[step, 7] = bc
        log_float[step, 0] = ssd
        log_float[step, 1] = best_p
        step += 1


# -- public API ----------------------------------------------------------------


def fill_front(mask: np.ndarray) -> np.ndarray:
    """Unknown cells with at least one known 4-neighbour."""
    known = np.asarray(mask, dtype=bool)
    near = np.zeros_like(known)
    near[1:, :] |= known[:-1, :]
    near[:-1, :] |= known[1:, :]
    near[:, 1:] |= known[:, :-1]
    near[:, :-1] |= known[:, 1:]
    return near & ~known


def priority_map(state: FillState, cfg: PatchConfig) -> np.ndarray:
    """``C * D`` on front cells, ``-1`` elsewhere.

    ``C`` sums the confidence of the known cells in the clipped patch and
    divides by the clipped patch area. ``D`` projects the rotated
    known-cell gradient (averaged over the 3x3 neighbourhood) on the unit
    normal of the mask, floored at ``DATA_FLOOR``.
    """
    return _priority_map(state.values, state.mask, state.confidence, cfg.half)


def priority(cell: tuple[int, int], state: FillState, cfg: PatchConfig) -> float:
    r, c = cell
    if not _is_front(state.mask, r, c):
        raise ValueError(f"cell {cell} is not on the fill front")
    return float(_cell_priority(state.values, state.mask, state.confidence, cfg.half, r, c))


def best_patch(target: tuple[int, int], state: FillState, cfg: PatchConfig) -> tuple[tuple[int, int], float]:
    """Top-left corner of the best source patch for ``target`` and its SSD.

    Candidates are fully known windows with the clipped target's shape;
    ties go to the smallest row-major corner. Band search keeps windows
    whose cell matching ``target`` lies within ``band_width`` (Chebyshev)
    and widens to the whole known region when the band is empty.
    """
    rect = patch_rect(target, state.mask.shape, cfg.half)
    if not state.mask[rect.slices()].any():
        raise ValueError(f"target patch at {target} has no known cell")
    br, bc, ssd = _best_patch(
        state.values, state.mask, cfg.half, target[0], target[1],
        cfg.search_region == "band", cfg.band_width,
    )
    if br < 0:
        raise InsufficientContext(f"insufficient context: no fully known {rect.shape} patch")
    return (int(br), int(bc)), float(ssd)


def _check_context(mask: np.ndarray, cfg: PatchConfig) -> None:
    p = cfg.patch_size
    if mask.sum() < p * p or mask.shape[0] < p or mask.shape[1] < p:
        raise InsufficientContext("insufficient context: known region smaller than one patch")
    integral = _unknown_integral(mask)
    counts = integral[p:, p:] - integral[:-p, p:] - integral[p:, :-p] + integral[:-p, :-p]
    if not np.any(counts == 0):
        raise InsufficientContext("insufficient context: no fully known patch")


def inpaint(values, mask, cfg: PatchConfig | None = None, return_log: bool = False):
    """Fill every unknown cell (``mask`` False) of ``values``.

    Deterministic for a given input: priority and SSD ties resolve to the
    first cell/corner in row-major order. Known cells are never modified.

    Returns
    -------
    filled : ndarray
    log : list of FillStep, only when ``return_log`` is set
    """
    cfg = cfg or PatchConfig()
    state = FillState.start(values, mask)
    unknown = int((~state.mask).sum())
    if unknown == 0:
        return (state.values, []) if return_log else state.values
    _check_context(state.mask, cfg)
    log_int = np.zeros((unknown, 8), dtype=np.int64)
    log_float = np.zeros((unknown, 2))
    steps = _fill(
        state.values, state.mask, state.confidence, cfg.half,
        cfg.search_region == "band", cfg.band_width, log_int, log_float,
    )
    if steps < 0:
        raise InsufficientContext("insufficient context: no source patch for a front cell")
    if not return_log:
        return state.values
    log = [
        FillStep(
            step=k,
            target=(int(li[0]), int(li[1])),
            rect=Rect(int(li[2]), int(li[3]), int(li[4]), int(li[5])),
            source=(int(li[6]), int(li[7])),
            ssd=float(lf[0]),
            priority=float(lf[1]),
        )
        for k, (li, lf) in enumerate(zip(log_int[:steps], log_float[:steps]))
    ]
    return state.values, log


def write_fill_log(log, path) -> None:
    """CSV dump: ``step,target_cell,source_patch,ssd``.

    ``target_cell`` is ``row;col``; ``source_patch`` is
    ``row;col;height;width`` of the copied window.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "target_cell", "source_patch", "ssd"])
        for rec in log:
            writer.writerow([
                rec.step,
                f"{rec.target[0]};{rec.target[1]}",
                f"{rec.source[0]};{rec.source[1]};{rec.rect.shape[0]};{rec.rect.shape[1]}",
                repr(rec.ssd),
            ])
