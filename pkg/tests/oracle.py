"""Exhaustive-search reference for the exemplar inpainter.

Replays a fill log step by step: every chosen source window must attain
the minimum normalized SSD over all admissible windows (ties allowed
within a relative tolerance), and copying it must reproduce the state the
library reached.
"""

import numpy as np

from fm2i.inpaint import PatchConfig, fill_front, inpaint, patch_rect

REL_TOL = 1e-12


def candidate_ssds(values, mask, rect, band_width=None):
    """All fully known windows of ``rect``'s shape as (ssd, row, col), row-major."""
    ph, pw = rect.shape
    tgt = values[rect.slices()]
    known = mask[rect.slices()]
    count = known.sum()
    out = []
    for i in range(values.shape[0] - ph + 1):
        for j in range(values.shape[1] - pw + 1):
            if band_width is not None and (abs(i - rect.r0) > band_width or abs(j - rect.c0) > band_width):
                continue
            if not mask[i:i + ph, j:j + pw].all():
                continue
            diff = values[i:i + ph, j:j + pw] - tgt
            out.append((float((diff[known] ** 2).sum() / count), i, j))
    return out


def replay(values, mask, cfg=None):
    """Run the library, then check each step against the oracle; returns (filled, steps)."""
    cfg = cfg or PatchConfig()
    filled, log = inpaint(values, mask, cfg, return_log=True)
    vals = np.where(mask, values, 0.0).astype(float)
    known = mask.copy()
    for rec in log:
        front = fill_front(known)
        assert front[rec.target], f"step {rec.step}: target {rec.target} not on the front"
        rect = patch_rect(rec.target, known.shape, cfg.half)
        assert rect == rec.rect
        cands = None
        if cfg.search_region == "band":
            cands = candidate_ssds(vals, known, rect, cfg.band_width)
        if not cands:
            cands = candidate_ssds(vals, known, rect)
        best = min(c[0] for c in cands)
        tol = REL_TOL * max(1.0, best)
        ties = [(i, j) for s, i, j in cands if s <= best + tol]
        chosen = dict(((i, j), s) for s, i, j in cands).get(rec.source)
        assert chosen is not None, f"step {rec.step}: source {rec.source} is not an admissible window"
        assert abs(chosen - rec.ssd) <= tol, f"step {rec.step}: logged ssd {rec.ssd} != {chosen}"
        assert rec.source in ties, f"step {rec.step}: ssd {chosen} above oracle minimum {best}"
        if len(ties) == 1:
            assert rec.source == ties[0]
        ph, pw = rect.shape
        hole = ~known[rect.slices()]
        src = vals[rec.source[0]:rec.source[0] + ph, rec.source[1]:rec.source[1] + pw]
        vals[rect.slices()][hole] = src[hole]
        known[rect.slices()] = True
    assert known.all()
    np.testing.assert_array_equal(vals, filled)
    return filled, log


def random_case(seed):
    """Random image (noise, smooth or few-level) with rectangular holes and an L-shaped band."""
    rng = np.random.default_rng(seed)
    h, w = rng.integers(8, 25, size=2)
    style = seed % 3
    if style == 0:
        img = rng.uniform(0, 1, (h, w))
    elif style == 1:
        r, c = np.mgrid[0:h, 0:w]
        img = np.sin(r / rng.uniform(2, 5)) * np.cos(c / rng.uniform(2, 5))
    else:
        img = rng.integers(0, 3, (h, w)).astype(float)
    mask = np.ones((h, w), dtype=bool)
    for _ in range(rng.integers(1, 3)):
        rh, rw = rng.integers(1, 4, size=2)
        r0, c0 = rng.integers(0, h - rh), rng.integers(0, w - rw)
        mask[r0:r0 + rh, c0:c0 + rw] = False
    if rng.random() < 0.5:
        band = rng.integers(1, 3)
        mask[h - band:, :] = False
        mask[:, w - band:] = False
    return img, mask
