"""Raster image storage, color transfer, sampling and blur pyramids.

All arithmetic elsewhere in the package happens on linear-light RGBA
arrays with straight (non-premultiplied) alpha.  PNG files are treated
as 8-bit sRGB on read/write unless explicitly loaded raw (shape maps
carry data, not color, and bypass the transfer function).

Coordinate convention: (u, v) = (0, 0) is the center of the top-left
texel and (1, 1) the center of the bottom-right texel, so an identity
mapping resamples an image bit-exact.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from typing import BinaryIO

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter


class EdgeMode(Enum):
    """Out-of-range sampling policy: replicate edge texels or tile."""

    CLAMP = "clamp"
    WRAP = "wrap"


@dataclass(frozen=True)
class RasterImage:
    """Linear-light RGBA raster, straight alpha, channels in [0, 1].

    ``pixels`` has shape (height, width, 4), dtype float64, and is
    frozen after construction so images can be shared freely across
    threads and pyramid levels.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 4:
            raise ValueError(f"pixels must have shape (h, w, 4), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.isfinite(px).all():
            raise ValueError("pixel values must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        if px is self.pixels and px.flags.writeable:
            px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def full(cls, width: int, height: int, rgba=(0.0, 0.0, 0.0, 1.0)) -> "RasterImage":
        """Constant-color image."""
        px = np.empty((height, width, 4), dtype=np.float64)
        px[:] = np.asarray(rgba, dtype=np.float64)
        return cls(px)


@dataclass(frozen=True)
class BlurPyramid:
    """Progressively smoothed full-resolution copies of one image.

    Level 0 is the source image bit-exact; each following level roughly
    doubles the blur radius.  All levels share the source resolution,
    so cross-level sampling needs no coordinate bookkeeping.
    """

    levels: tuple[RasterImage, ...]

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("pyramid needs at least one level")
        w, h = self.levels[0].width, self.levels[0].height
        for lv in self.levels[1:]:
            if lv.width != w or lv.height != h:
                raise ValueError("all pyramid levels must share one resolution")

    @property
    def level_count(self) -> int:
        return len(self.levels)


# ---------------------------------------------------------------------------
# sRGB transfer (IEC 61966-2-1), float64 so roundtrips survive 8-bit files.

def srgb_to_linear(v):
    """sRGB-encoded channel(s) in [0, 1] -> linear light in [0, 1]."""
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v):
    """Linear-light channel(s) in [0, 1] -> sRGB-encoded in [0, 1]."""
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1.0 / 2.4) - 0.055)


# ---------------------------------------------------------------------------
# Sampling

def _wrap01(t: np.ndarray) -> np.ndarray:
    return t - np.floor(t)


def _gather_bilinear(pixels: np.ndarray, px, py) -> np.ndarray:
    """Bilinear fetch at pixel coordinates, edges clamped.

    Integer coordinates return the stored texel exactly: the blend
    weights degenerate to (1, 0) which is lossless in IEEE arithmetic.
    """
    h, w = pixels.shape[:2]
    px = np.clip(px, 0.0, float(w - 1))
    py = np.clip(py, 0.0, float(h - 1))
    x0 = np.floor(px).astype(np.intp)
    y0 = np.floor(py).astype(np.intp)
    if w > 1:
        x0 = np.minimum(x0, w - 2)
    if h > 1:
        y0 = np.minimum(y0, h - 2)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (px - x0)[..., None]
    fy = (py - y0)[..., None]
    top = pixels[y0, x0] * (1.0 - fx) + pixels[y0, x1] * fx
    bot = pixels[y1, x0] * (1.0 - fx) + pixels[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(img: RasterImage, u, v, mode: EdgeMode = EdgeMode.CLAMP) -> np.ndarray:
    """Sample at (u, v) in texel-center coordinates; returns (..., 4).

    CLAMP replicates edge texels for out-of-range coordinates, WRAP
    tiles them modulo 1 before the pixel-space lookup.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if mode is EdgeMode.WRAP:
        u = _wrap01(u)
        v = _wrap01(v)
    return _gather_bilinear(img.pixels, u * (img.width - 1), v * (img.height - 1))


def sample_bilinear_px(img: RasterImage, px, py, mode: EdgeMode = EdgeMode.CLAMP) -> np.ndarray:
    """Pixel-coordinate variant of :func:`sample_bilinear`.

    Used where exactness of the identity mapping matters: integer pixel
    coordinates never pass through a uv conversion that could round.
    """
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    if mode is EdgeMode.WRAP:
        if img.width > 1:
            px = np.mod(px, float(img.width - 1))
        if img.height > 1:
            py = np.mod(py, float(img.height - 1))
    return _gather_bilinear(img.pixels, px, py)


# ---------------------------------------------------------------------------
# Blur pyramid

def _level_sigma(level: int) -> float:
    # base radius 1 texel at the first blurred level, doubling per level
    return float(2 ** (level - 1))


def build_pyramid(img: RasterImage, level_count: int,
                  mode: EdgeMode = EdgeMode.CLAMP) -> BlurPyramid:
    """Build ``level_count`` full-resolution levels of increasing blur.

    Each level is produced by low-pass filtering the previous one with
    a separable Gaussian whose increment brings the accumulated radius
    to 2**(k-1) texels at level k.  ``mode`` selects the padding at the
    image border (clamp replicates, wrap tiles); a tileable environment
    should be blurred with WRAP so its seams stay seamless.
    """
    if level_count < 1:
        raise ValueError("level_count must be >= 1")
    scipy_mode = "wrap" if mode is EdgeMode.WRAP else "nearest"
    levels = [img]
    arr = img.pixels
    for k in range(1, level_count):
        prev_sigma = _level_sigma(k - 1) if k > 1 else 0.0
        sigma = _level_sigma(k)
        inc = np.sqrt(sigma * sigma - prev_sigma * prev_sigma)
        arr = gaussian_filter(arr, sigma=(inc, inc, 0.0), mode=scipy_mode)
        levels.append(RasterImage(np.clip(arr, 0.0, 1.0)))
    return BlurPyramid(tuple(levels))


def _level_weights(pyr: BlurPyramid, blur_level):
    level = np.clip(np.asarray(blur_level, dtype=np.float64), 0.0,
                    float(pyr.level_count - 1))
    lo = np.floor(level).astype(np.intp)
    lo = np.minimum(lo, pyr.level_count - 1)
    hi = np.minimum(lo + 1, pyr.level_count - 1)
    frac = level - lo
    return lo, hi, frac


def sample_blurred(pyr: BlurPyramid, u, v, blur_level,
                   mode: EdgeMode = EdgeMode.CLAMP) -> np.ndarray:
    """Trilinear lookup: bilinear in the two bracketing levels, linear across.

    ``blur_level`` may be a scalar or a per-sample array; it is clamped
    to [0, level_count - 1].
    """
    lo, hi, frac = _level_weights(pyr, blur_level)
    if lo.ndim == 0:
        s_lo = sample_bilinear(pyr.levels[int(lo)], u, v, mode)
        if int(hi) == int(lo) or frac == 0.0:
            return s_lo
        s_hi = sample_bilinear(pyr.levels[int(hi)], u, v, mode)
        return s_lo * (1.0 - frac) + s_hi * frac
    return _sample_levels(pyr, lo, hi, frac,
                          lambda lv, m: sample_bilinear(pyr.levels[lv],
                                                        np.asarray(u)[m],
                                                        np.asarray(v)[m], mode))


def sample_blurred_px(pyr: BlurPyramid, px, py, blur_level,
                      mode: EdgeMode = EdgeMode.CLAMP) -> np.ndarray:
    """Pixel-coordinate variant of :func:`sample_blurred`."""
    lo, hi, frac = _level_weights(pyr, blur_level)
    if lo.ndim == 0:
        s_lo = sample_bilinear_px(pyr.levels[int(lo)], px, py, mode)
        if int(hi) == int(lo) or frac == 0.0:
            return s_lo
        s_hi = sample_bilinear_px(pyr.levels[int(hi)], px, py, mode)
        return s_lo * (1.0 - frac) + s_hi * frac
    return _sample_levels(pyr, lo, hi, frac,
                          lambda lv, m: sample_bilinear_px(pyr.levels[lv],
                                                           np.asarray(px)[m],
                                                           np.asarray(py)[m], mode))


def _sample_levels(pyr, lo, hi, frac, fetch):
    # Per-sample levels: gather each referenced pyramid level once.
    out = np.zeros(lo.shape + (4,), dtype=np.float64)
    fr = frac[..., None]
    for lv in np.unique(lo):
        m = lo == lv
        out[m] = fetch(int(lv), m) * (1.0 - fr[m])
    for lv in np.unique(hi):
        m = hi == lv
        out[m] += fetch(int(lv), m) * fr[m]
    return out


# ---------------------------------------------------------------------------
# Resampling (service previews)

def resize_channels(arr: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Bilinear resample of an (h, w, c) array onto a new grid."""
    if new_width < 1 or new_height < 1:
        raise ValueError("target size must be at least 1x1")
    h, w = arr.shape[:2]
    u = np.linspace(0.0, 1.0, new_width)
    v = np.linspace(0.0, 1.0, new_height)
    px, py = np.meshgrid(u * (w - 1), v * (h - 1))
    return _gather_bilinear(np.asarray(arr, dtype=np.float64), px, py)


def resize(img: RasterImage, new_width: int, new_height: int) -> RasterImage:
    if new_width == img.width and new_height == img.height:
        return img
    return RasterImage(np.clip(resize_channels(img.pixels, new_width, new_height), 0.0, 1.0))


# ---------------------------------------------------------------------------
# PNG I/O

# one linear value per possible byte, so 8-bit decode is a table lookup
_SRGB_DECODE_LUT = srgb_to_linear(np.arange(256) / 255.0)


def from_bytes_u8(raw: np.ndarray, srgb: bool = True) -> RasterImage:
    """8-bit (h, w, 4) array -> RasterImage; sRGB decode on color channels."""
    if srgb:
        px = np.empty(raw.shape, dtype=np.float64)
        px[..., :3] = _SRGB_DECODE_LUT[raw[..., :3]]
        px[..., 3] = raw[..., 3] / 255.0
    else:
        px = raw.astype(np.float64) / 255.0
    return RasterImage(px)


def to_bytes_u8(img: RasterImage, srgb: bool = True) -> np.ndarray:
    """RasterImage -> 8-bit (h, w, 4) array; sRGB encode on color channels."""
    px = img.pixels
    if srgb:
        px = np.concatenate([linear_to_srgb(px[..., :3]), px[..., 3:4]], axis=2)
    return np.round(np.clip(px, 0.0, 1.0) * 255.0).astype(np.uint8)


def read_png(source: str | BinaryIO | bytes, srgb: bool = True) -> RasterImage:
    """Read an 8-bit RGBA PNG (path, file object or bytes)."""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    with Image.open(source) as im:
        raw = np.asarray(im.convert("RGBA"), dtype=np.uint8)
    return from_bytes_u8(raw, srgb=srgb)


def png_bytes(img: RasterImage, srgb: bool = True) -> bytes:
    """Encode to PNG bytes; deterministic for identical pixel content."""
    buf = io.BytesIO()
    Image.fromarray(to_bytes_u8(img, srgb=srgb), mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def write_png(path, img: RasterImage, srgb: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(png_bytes(img, srgb=srgb))
