"""Matrix <-> 24-bit image encodings and binary PPM I/O.

Codes pack three 8-bit channels as ``R * 65536 + G * 256 + B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np

MAX_CODE = 256 ** 3 - 1
UNKNOWN_RGB = (255, 0, 255)


class Technique(str, Enum):
    STATIC_DICT = "static_dict"
    MINIMAL_DICT = "minimal_dict"
    GRAY256 = "gray256"
    DYNAMIC = "dynamic"

    @classmethod
    def parse(cls, value) -> "Technique":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown encoding technique {value!r}") from None


@dataclass(frozen=True)
class EncodingSpec:
    technique: Technique = Technique.DYNAMIC
    value_lo: float = 0.0
    value_hi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "technique", Technique.parse(self.technique))
        if not self.value_lo < self.value_hi:
            raise ValueError("value_lo must be below value_hi")


@dataclass
class ImageGrid:
    """Grid of 24-bit codes with a known/unknown mask (True = known).

    ``palette`` is only set by the minimal dictionary encoding, where it
    maps each code back to its value.
    """

    pixels: np.ndarray
    mask: np.ndarray
    palette: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.int64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.pixels.ndim != 2 or self.pixels.shape != self.mask.shape:
            raise ValueError("pixels and mask must be 2D arrays of equal shape")
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > MAX_CODE):
            raise ValueError("pixel codes must lie in [0, 256**3 - 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def channels(self) -> np.ndarray:
        """``(height, width, 3)`` uint8 RGB array."""
        return unpack_rgb(self.pixels)


def pack_rgb(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.int64)
    return rgb[..., 0] * 65536 + rgb[..., 1] * 256 + rgb[..., 2]


def unpack_rgb(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return np.stack([(codes >> 16) & 255, (codes >> 8) & 255, codes & 255], axis=-1).astype(np.uint8)


class StaticDictionary:
    """Code -> value table over the full 24-bit space, filled on first use.

    Same bijection as the dynamic technique; entries are materialized only
    for codes that have actually been looked up.
    """

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = lo, hi
        self.table: dict[int, float] = {}

    def value(self, code: int) -> float:
        try:
            return self.table[code]
        except KeyError:
            v = self.table[code] = self.lo + code / MAX_CODE * (self.hi - self.lo)
            return v

    def code(self, value: float) -> int:
        c = int(np.rint((value - self.lo) / (self.hi - self.lo) * MAX_CODE))
        c = min(max(c, 0), MAX_CODE)
        self.value(c)
        return c


@lru_cache(maxsize=16)
def static_dictionary(lo: float, hi: float) -> StaticDictionary:
    return StaticDictionary(lo, hi)


def _normalized(values: np.ndarray, spec: EncodingSpec) -> np.ndarray:
    return (values - spec.value_lo) / (spec.value_hi - spec.value_lo)


def encode(values, spec: EncodingSpec | None = None, mask=None) -> ImageGrid:
    """Encode a real matrix as an :class:`ImageGrid`.

    Known entries (``mask`` True, default everywhere) must lie within
    ``[spec.value_lo, spec.value_hi]``; unknown entries get code 0.
    """
    spec = spec or EncodingSpec()
    values = np.asarray(getattr(values, "data", values), dtype=np.float64)
    mask = np.ones(values.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    known = values[mask]
    tol = 1e-12 * (spec.value_hi - spec.value_lo)
    if known.size and (
        not np.all(np.isfinite(known))
        or known.min() < spec.value_lo - tol
        or known.max() > spec.value_hi + tol
    ):
        raise ValueError(f"known values outside [{spec.value_lo}, {spec.value_hi}]")
    unit = np.clip(_normalized(np.where(mask, values, spec.value_lo), spec), 0.0, 1.0)
    palette = None
    tech = spec.technique
    if tech is Technique.DYNAMIC:
        codes = np.rint(unit * MAX_CODE).astype(np.int64)
    elif tech is Technique.GRAY256:
        level = np.rint(unit * 255).astype(np.int64)
        codes = level * 65536 + level * 256 + level
    elif tech is Technique.STATIC_DICT:
        table = static_dictionary(spec.value_lo, spec.value_hi)
        flat = np.where(mask, values, spec.value_lo).ravel()
        codes = np.array([table.code(v) for v in flat], dtype=np.int64).reshape(values.shape)
    else:
        palette = np.unique(known) if known.size else np.array([spec.value_lo])
        if palette.size > MAX_CODE + 1:
            raise ValueError("too many distinct values for a 24-bit dictionary")
        codes = np.searchsorted(palette, np.where(mask, values, palette[0]))
    codes = np.where(mask, codes, 0)
    return ImageGrid(pixels=codes, mask=mask.copy(), palette=palette)


def decode(img: ImageGrid, spec: EncodingSpec | None = None) -> np.ndarray:
    """Map codes back to real values in ``[value_lo, value_hi]``."""
    spec = spec or EncodingSpec()
    codes = img.pixels
    span = spec.value_hi - spec.value_lo
    tech = spec.technique
    if tech is Technique.DYNAMIC:
        return spec.value_lo + codes / MAX_CODE * span
    if tech is Technique.STATIC_DICT:
        table = static_dictionary(spec.value_lo, spec.value_hi)
        return np.array([table.value(int(c)) for c in codes.ravel()]).reshape(codes.shape)
    if tech is Technique.GRAY256:
        return spec.value_lo + (codes & 255) / 255 * span
    if img.palette is None:
        raise ValueError("minimal_dict images need their palette to decode")
    return img.palette[np.clip(codes, 0, img.palette.size - 1)]


def quantize(values, spec: EncodingSpec | None = None, mask=None) -> np.ndarray:
    """``decode(encode(values))``: the values the image actually carries."""
    spec = spec or EncodingSpec()
    img = encode(values, spec, mask)
    return decode(img, spec)


def export_ppm(img: ImageGrid, path) -> None:
    """Write a binary P6 PPM; unknown cells are drawn magenta."""
    rgb = img.channels()
    rgb[~img.mask] = UNKNOWN_RGB
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + rgb.tobytes())


def _ppm_tokens(raw: bytes, count: int) -> tuple[list[int], int]:
    tokens, pos = [], 2
    while len(tokens) < count:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while raw[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(raw[start:pos]))
    return tokens, pos + 1


def import_ppm(path) -> ImageGrid:
    """Read a binary P6 PPM (maxval 255). The mask comes back all True."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P6":
        raise ValueError("not a binary PPM (P6) file")
    (width, height, maxval), offset = _ppm_tokens(raw, 3)
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    data = np.frombuffer(raw, dtype=np.uint8, count=width * height * 3, offset=offset)
    rgb = data.reshape(height, width, 3)
    return ImageGrid(pixels=pack_rgb(rgb), mask=np.ones((height, width), dtype=bool))
