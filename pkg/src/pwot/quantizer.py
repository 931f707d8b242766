"""Hybrid threshold / edge-detection pixel quantizer.

Frames are ``(height, width, 3)`` uint8 RGB arrays.  Target pixels are sampled
along two bands between border points found with a Prewitt operator, sea
pixels are sampled in a thin ring outside the selection window, and per-channel
``mean +/- scale * std`` ranges turn every pixel into one bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import ClippingError, ConfigurationError, DimensionError
from .geometry import Rect

RGB = "rgb"
YCBCR = "ycbcr"
COLORSPACES = (RGB, YCBCR)

DEFAULT_SCALE_GRID = tuple(0.5 * i for i in range(1, 9))
YCBCR_SCALES = (3.0, 3.0, 1.5)
BAND_MARGIN = 2
RING_WIDTH = 3
MIN_SLW = 5

_TO_YCBCR = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YCBCR_OFFSET = np.array([0.0, 128.0, 128.0])


def _round_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def rgb_to_ycbcr(pixels) -> np.ndarray:
    """BT.601 full-range conversion of ``(..., 3)`` RGB values to uint8 YCbCr."""
    rgb = np.asarray(pixels, dtype=np.float64)
    return _round_u8(rgb @ _TO_YCBCR.T + _YCBCR_OFFSET)


def ycbcr_to_rgb(pixels) -> np.ndarray:
    ycc = np.asarray(pixels, dtype=np.float64) - _YCBCR_OFFSET
    return _round_u8(ycc @ np.linalg.inv(_TO_YCBCR).T)


def to_colorspace(pixels, colorspace: str) -> np.ndarray:
    if colorspace == RGB:
        values = np.asarray(pixels)
        return values.astype(np.uint8) if values.dtype.kind in "ui" else _round_u8(values)
    if colorspace == YCBCR:
        return rgb_to_ycbcr(pixels)
    raise ConfigurationError(f"unknown colorspace {colorspace!r}; expected one of {COLORSPACES}")


def luma(frame: np.ndarray) -> np.ndarray:
    return np.asarray(frame, dtype=np.float64) @ _TO_YCBCR[0]


@dataclass(frozen=True)
class ChannelStats:
    colorspace: str
    mean: tuple[float, float, float]
    std: tuple[float, float, float]


@dataclass(frozen=True)
class ThresholdSet:
    """Per-channel inclusive ranges ``mean +/- scale * std``.

    ``mean``/``std`` are in the colorspace's channel order (R, G, B or
    Y, Cb, Cr).  ``scales`` is ``(x, y, z)``: x, y, z drive R, G, B for RGB
    and Cr, Y, Cb for YCbCr.
    """

    colorspace: str
    mean: tuple[float, float, float]
    std: tuple[float, float, float]
    scales: tuple[float, float, float]
    score: float | None = None

    def __post_init__(self):
        if self.colorspace not in COLORSPACES:
            raise ConfigurationError(f"unknown colorspace {self.colorspace!r}")
        if min(self.scales) < 0 or min(self.std) < 0:
            raise ConfigurationError("scales and standard deviations must be non-negative")

    @property
    def channel_scales(self) -> np.ndarray:
        x, y, z = self.scales
        return np.array([x, y, z] if self.colorspace == RGB else [y, z, x])

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.mean) - self.channel_scales * np.asarray(self.std)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.mean) + self.channel_scales * np.asarray(self.std)

    @property
    def levels(self) -> tuple[float, ...]:
        """L1..L6 in the published listing order (upper, lower per pair)."""
        order = (0, 1, 2) if self.colorspace == RGB else (2, 0, 1)
        lo, up = self.lower, self.upper
        return tuple(float(v) for c in order for v in (up[c], lo[c]))

    def widened(self, factors) -> "ThresholdSet":
        """Multiply ``(x, y, z)`` by ``factors``; below 1 narrows the ranges."""
        return replace(self, scales=tuple(float(s * f) for s, f in zip(self.scales, factors)))


@dataclass(frozen=True)
class SampleBands:
    points: tuple[tuple[int, int], ...]
    pf: np.ndarray
    pw: np.ndarray


@dataclass(frozen=True)
class CorruptionSpec:
    flip_fraction: float
    seed: int = 0


def check_inside(frame: np.ndarray, region: Rect) -> None:
    height, width = frame.shape[:2]
    if not region.inside(width, height):
        raise ClippingError(f"region {region.as_tuple()} is outside the {width}x{height} frame")


def prewitt_magnitude(frame: np.ndarray, region: Rect) -> np.ndarray:
    """3x3 Prewitt gradient magnitude of the grayscale frame over ``region``.

    Neighbours outside the region but inside the frame are used; the frame
    border is replicated.
    """
    height, width = frame.shape[:2]
    x0, y0 = max(region.x - 1, 0), max(region.y - 1, 0)
    x1, y1 = min(region.x + region.w + 1, width), min(region.y + region.h + 1, height)
    gray = luma(frame[y0:y1, x0:x1])
    gx = ndimage.prewitt(gray, axis=1, mode="nearest")
    gy = ndimage.prewitt(gray, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    oy, ox = region.y - y0, region.x - x0
    return mag[oy:oy + region.h, ox:ox + region.w]


def prewitt_border_points(frame: np.ndarray, slw: Rect) -> tuple[tuple[int, int], ...]:
    """Strongest edge along each of the four rays from the window centre.

    Returns ``(p1, p2, p3, p4)`` = left, right, top, bottom as ``(x, y)``.
    Ties go to the pixel nearest the centre.
    """
    if slw.w < MIN_SLW or slw.h < MIN_SLW:
        raise ConfigurationError(f"selection window must be at least {MIN_SLW}x{MIN_SLW}, got {slw.w}x{slw.h}")
    check_inside(frame, slw)
    mag = prewitt_magnitude(frame, slw)
    cx, cy = slw.w // 2, slw.h // 2

    def strongest(values: np.ndarray) -> int:
        # argmax returns the first maximum, i.e. the one nearest the centre
        return int(np.argmax(values))

    left = cx - strongest(mag[cy, cx::-1])
    right = cx + strongest(mag[cy, cx:])
    top = cy - strongest(mag[cy::-1, cx])
    bottom = cy + strongest(mag[cy:, cx])
    return (
        (slw.x + left, slw.y + cy),
        (slw.x + right, slw.y + cy),
        (slw.x + cx, slw.y + top),
        (slw.x + cx, slw.y + bottom),
    )


def _segment(a: tuple[int, int], b: tuple[int, int], margin: int) -> list[tuple[int, int]]:
    (ax, ay), (bx, by) = a, b
    n = max(abs(bx - ax), abs(by - ay))
    pts = [(round(ax + (bx - ax) * t / n), round(ay + (by - ay) * t / n)) for t in range(n + 1)] if n else [a]
    return pts[margin:len(pts) - margin] if margin else pts


def ring_pixels(frame: np.ndarray, slw: Rect, width: int = RING_WIDTH) -> np.ndarray:
    height, fwidth = frame.shape[:2]
    x0, y0 = max(slw.x - width, 0), max(slw.y - width, 0)
    x1, y1 = min(slw.x + slw.w + width, fwidth), min(slw.y + slw.h + width, height)
    mask = np.ones((y1 - y0, x1 - x0), dtype=bool)
    ix0, iy0 = max(slw.x - x0, 0), max(slw.y - y0, 0)
    mask[iy0:iy0 + slw.h, ix0:ix0 + slw.w] = False
    return frame[y0:y1, x0:x1][mask]


def sample_bands(frame: np.ndarray, slw: Rect, points) -> SampleBands:
    """Target pixels on the p1-p2 and p3-p4 segments; sea pixels in the ring."""
    p1, p2, p3, p4 = points
    coords = _segment(p1, p2, BAND_MARGIN) + _segment(p3, p4, BAND_MARGIN)
    if not coords:
        coords = _segment(p1, p2, 0) + _segment(p3, p4, 0)
    if not coords:
        raise ConfigurationError("target band is empty")
    xs, ys = zip(*coords)
    pf = frame[list(ys), list(xs)]
    pw = ring_pixels(frame, slw)
    if pw.size == 0:
        raise ConfigurationError("no frame pixels surround the selection window")
    return SampleBands(tuple(points), pf, pw)


def channel_stats(pixels, colorspace: str = RGB) -> ChannelStats:
    """Per-channel mean and population standard deviation of RGB ``pixels``."""
    values = to_colorspace(np.asarray(pixels).reshape(-1, 3), colorspace).astype(np.float64)
    if values.shape[0] == 0:
        raise ConfigurationError("cannot compute statistics of an empty pixel list")
    return ChannelStats(colorspace, tuple(values.mean(axis=0)), tuple(values.std(axis=0)))


def thresholds_rgb(pf, pw, scale_grid=DEFAULT_SCALE_GRID) -> ThresholdSet:
    """RGB ranges around the target sample, scales picked by grid search.

    Each ``(x, y, z)`` in ``scale_grid**3`` is scored by the fraction of
    ``pf`` inside all three ranges minus the fraction of ``pw`` inside them.
    Ties go to the smallest ``x + y + z``, then lexicographically.
    """
    pf = np.asarray(pf, dtype=np.float64).reshape(-1, 3)
    pw = np.asarray(pw, dtype=np.float64).reshape(-1, 3)
    stats = channel_stats(pf, RGB)
    mean, std = np.asarray(stats.mean), np.asarray(stats.std)
    grid = np.asarray(scale_grid, dtype=np.float64)

    def inside_counts(sample: np.ndarray) -> np.ndarray:
        dev = np.abs(sample - mean)
        # inside[c, s, i]: pixel i within scale s on channel c
        inside = (dev.T[:, None, :] <= grid[None, :, None] * std[:, None, None]).astype(np.int64)
        return np.einsum("ai,bi,ci->abc", inside[0], inside[1], inside[2])

    n_pf, n_pw = len(pf), len(pw)
    # integer form of frac_pf - frac_pw keeps tie detection exact
    score = inside_counts(pf) * n_pw - inside_counts(pw) * n_pf
    best = max(
        itertools.product(range(len(grid)), repeat=3),
        key=lambda ijk: (score[ijk], -sum(grid[list(ijk)]), tuple(-v for v in ijk)),
    )
    scales = tuple(float(grid[i]) for i in best)
    return ThresholdSet(RGB, stats.mean, stats.std, scales, score=float(score[best]) / (n_pf * n_pw))


def thresholds_ycbcr(stats: ChannelStats, scales=YCBCR_SCALES) -> ThresholdSet:
    """Fixed-scale YCbCr ranges: x on Cr, y on Y, z on Cb."""
    if stats.colorspace != YCBCR:
        raise ConfigurationError("YCbCr thresholds need statistics computed in YCbCr")
    return ThresholdSet(YCBCR, stats.mean, stats.std, tuple(float(s) for s in scales))


def quantize_pixels(pixels, thresholds: ThresholdSet) -> np.ndarray:
    """1 where every channel lies in its inclusive range, else 0."""
    values = to_colorspace(pixels, thresholds.colorspace)
    ok = (values >= thresholds.lower) & (values <= thresholds.upper)
    return ok.all(axis=-1).astype(np.uint8)


def quantize_region(frame: np.ndarray, region: Rect, thresholds: ThresholdSet) -> np.ndarray:
    """Bit image of ``region`` with shape ``(h, w)`` (row-major pattern order)."""
    check_inside(frame, region)
    return quantize_pixels(frame[region.y:region.y + region.h, region.x:region.x + region.w], thresholds)


def flip_count(fraction: float, length: int) -> int:
    if not 0.0 <= fraction <= 1.0:
        raise ConfigurationError(f"flip fraction must be in [0, 1], got {fraction}")
    return int(np.floor(fraction * length + 0.5))


def corrupt_bits(pattern: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Flip exactly ``round(f * length)`` distinct, seeded positions."""
    bits = np.asarray(pattern, dtype=np.uint8)
    flat = bits.ravel().copy()
    m = flip_count(spec.flip_fraction, flat.size)
    positions = np.random.default_rng(spec.seed).permutation(flat.size)[:m]
    flat[positions] ^= 1
    return flat.reshape(bits.shape)


def corrupt_rows(patterns: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Independently corrupt every row of a 2-D pattern stack.

    Each row gets exactly ``round(fraction * row_length)`` distinct flips.
    """
    if patterns.ndim != 2:
        raise DimensionError("expected a 2-D stack of flat patterns")
    rows, length = patterns.shape
    m = flip_count(fraction, length)
    out = patterns.copy()
    if m == 0 or rows == 0:
        return out
    if m == length:
        return out ^ 1
    keys = rng.random((rows, length))
    positions = np.argpartition(keys, m - 1, axis=1)[:, :m]
    out[np.arange(rows)[:, None], positions] ^= 1
    return out
