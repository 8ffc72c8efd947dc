"""Shape maps: a 2D vector field (x, y) plus a thickness channel d.

A shape map drives every optical effect in the compositor.  The (x, y)
components live in [-1, 1] and behave like the horizontal part of a
normal map; d in [0, 1] is an independent per-texel thickness whose
non-zero region doubles as the object mask.  The field is allowed to be
non-conservative, so maps can describe shapes no height field produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .imagebuf import RasterImage, from_bytes_u8, read_png, resize_channels, to_bytes_u8

DEFAULT_W = 0.5


@dataclass(frozen=True)
class ShapeMap:
    """Per-texel (x, y, d) fields, each shaped (height, width), float64."""

    x: np.ndarray
    y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        fields = {}
        for name in ("x", "y", "d"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} must be finite")
            fields[name] = arr
        if not (fields["x"].shape == fields["y"].shape == fields["d"].shape):
            raise ValueError("x, y and d must share one shape")
        if fields["x"].shape[0] < 1 or fields["x"].shape[1] < 1:
            raise ValueError("shape map must be at least 1x1")
        if abs(fields["x"]).max() > 1.0 or abs(fields["y"]).max() > 1.0:
            raise ValueError("x and y must lie in [-1, 1]")
        if fields["d"].min() < 0.0 or fields["d"].max() > 1.0:
            raise ValueError("d must lie in [0, 1]")
        for name, arr in fields.items():
            if arr is getattr(self, name) and arr.flags.writeable:
                arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def width(self) -> int:
        return self.x.shape[1]

    @property
    def height(self) -> int:
        return self.x.shape[0]

    @property
    def mask(self) -> np.ndarray:
        """Boolean object mask: the region where d is non-zero."""
        return self.d != 0.0


def check_w(w: float) -> float:
    w = float(w)
    if not 0.0 < w <= 1.0:
        raise ValueError(f"w must lie in (0, 1], got {w}")
    return w


# ---------------------------------------------------------------------------
# Codec: (x, y, d) <-> raw RGB channels

def decode_shape_map(img: RasterImage) -> ShapeMap:
    """Map raw channels to fields: x = 2r - 1, y = 2g - 1, d = b.

    The image must have been loaded raw (no sRGB decode); the alpha
    channel is ignored.  Values are clamped into the field ranges so
    hand-painted maps never fail to load.
    """
    px = img.pixels
    x = np.clip(2.0 * px[..., 0] - 1.0, -1.0, 1.0)
    y = np.clip(2.0 * px[..., 1] - 1.0, -1.0, 1.0)
    d = np.clip(px[..., 2], 0.0, 1.0)
    return ShapeMap(x, y, d)


def encode_shape_map(sm: ShapeMap) -> RasterImage:
    """Inverse of :func:`decode_shape_map`; alpha set fully opaque."""
    px = np.empty((sm.height, sm.width, 4), dtype=np.float64)
    px[..., 0] = 0.5 * (sm.x + 1.0)
    px[..., 1] = 0.5 * (sm.y + 1.0)
    px[..., 2] = sm.d
    px[..., 3] = 1.0
    return RasterImage(np.clip(px, 0.0, 1.0))


def load_shape_map(source: str | BinaryIO | bytes, srgb: bool = False) -> ShapeMap:
    """Read a shape map PNG.

    Shape maps are data, so channels are read raw by default; pass
    ``srgb=True`` for maps exported through a color-managed tool that
    baked in an sRGB transfer.
    """
    return decode_shape_map(read_png(source, srgb=srgb))


def save_shape_map(path, sm: ShapeMap) -> None:
    from .imagebuf import write_png

    write_png(path, encode_shape_map(sm), srgb=False)


def shape_map_png_bytes(sm: ShapeMap) -> bytes:
    from .imagebuf import png_bytes

    return png_bytes(encode_shape_map(sm), srgb=False)


# ---------------------------------------------------------------------------
# Normal recovery

def normal_z(x, y, w: float = DEFAULT_W):
    """Recover the implied third normal component for a field scaled by w.

    z = sqrt(max(0, 1 - w^2 x^2 - w^2 y^2)).  The clamp at zero absorbs
    user-painted fields with x^2 + y^2 > 1; for w <= 1/sqrt(2) the
    radicand is never negative.
    """
    w = check_w(w)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.sqrt(np.maximum(0.0, 1.0 - w * w * (x * x + y * y)))


def incident_t(x, y, w: float = DEFAULT_W):
    """Collapse (x, y) to a single incident parameter t in [0, 1].

    t = 1 - z: zero for a head-on surface, approaching one at grazing.
    """
    return 1.0 - normal_z(x, y, w)


def derive_d_from_z(sm: ShapeMap, w: float = DEFAULT_W) -> ShapeMap:
    """Normal-map fallback: replace d with the recovered z component.

    Useful for plain normal maps that carry no thickness of their own;
    z is naturally small near silhouettes, which is where thickness
    matters most.
    """
    return ShapeMap(sm.x, sm.y, np.clip(normal_z(sm.x, sm.y, w), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Diagnostics

def curl_diagnostic(sm: ShapeMap) -> np.ndarray:
    """Discrete curl dy/du - dx/dv per texel (central differences).

    A conservative field (the gradient of some height field) has zero
    curl; a persistent non-zero value flags an "impossible" shape.
    Derivatives are taken in texel-center units where u and v span
    [0, 1]; border texels, which lack a full stencil, are zero.
    """
    if sm.width < 2 or sm.height < 2:
        raise ValueError("curl needs at least a 2x2 map")
    curl = np.zeros((sm.height, sm.width), dtype=np.float64)
    if sm.width < 3 or sm.height < 3:
        return curl
    du = 1.0 / (sm.width - 1)
    dv = 1.0 / (sm.height - 1)
    dy_du = (sm.y[1:-1, 2:] - sm.y[1:-1, :-2]) / (2.0 * du)
    dx_dv = (sm.x[2:, 1:-1] - sm.x[:-2, 1:-1]) / (2.0 * dv)
    curl[1:-1, 1:-1] = dy_du - dx_dv
    return curl


def resize_shape_map(sm: ShapeMap, new_width: int, new_height: int) -> ShapeMap:
    """Bilinear resample of the three fields (preview downscaling)."""
    if new_width == sm.width and new_height == sm.height:
        return sm
    stacked = np.stack([sm.x, sm.y, sm.d], axis=2)
    out = resize_channels(stacked, new_width, new_height)
    return ShapeMap(np.clip(out[..., 0], -1.0, 1.0),
                    np.clip(out[..., 1], -1.0, 1.0),
                    np.clip(out[..., 2], 0.0, 1.0))


# ---------------------------------------------------------------------------
# Procedural fixtures (tests, CLI, UI gallery)

def gen_flat_map(size: int) -> ShapeMap:
    """All-zero map: no object anywhere, compositing reproduces the background."""
    if size < 2:
        raise ValueError("size must be >= 2")
    zero = np.zeros((size, size), dtype=np.float64)
    return ShapeMap(zero, zero, zero)


def gen_sphere_map(size: int, radius: float = 1.0, thickness_scale: float = 1.0) -> ShapeMap:
    """Orthographic sphere on a transparent background.

    (x, y) is the unit-normal projection inside the disc; d is the
    normalized chord length through the sphere times ``thickness_scale``,
    so thickness falls to zero at the silhouette.  ``radius`` is a
    fraction of the image half-width.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    if not 0.0 < thickness_scale <= 1.0:
        raise ValueError("thickness_scale must lie in (0, 1]")
    c = (size - 1) / 2.0
    r_tex = radius * c
    jj, ii = np.meshgrid(np.arange(size, dtype=np.float64),
                         np.arange(size, dtype=np.float64))
    rx = (jj - c) / r_tex
    ry = (ii - c) / r_tex
    r2 = rx * rx + ry * ry
    inside = r2 < 1.0
    nz = np.sqrt(np.maximum(0.0, 1.0 - r2))
    x = np.where(inside, rx, 0.0)
    y = np.where(inside, ry, 0.0)
    d = np.where(inside, nz * thickness_scale, 0.0)
    return ShapeMap(x, y, d)


def gen_rotation_map(size: int) -> ShapeMap:
    """Field that swirls the background about the image center.

    x = 2(v - 1/2), y = -2(u - 1/2), d = 1: the field reaches [-1, 1]
    at the image edges and has no fixed height field (constant non-zero
    curl), making it the canonical impossible shape.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    coords = np.linspace(0.0, 1.0, size)
    u, v = np.meshgrid(coords, coords, indexing="xy")
    x = 2.0 * (v - 0.5)
    y = -2.0 * (u - 0.5)
    d = np.ones((size, size), dtype=np.float64)
    return ShapeMap(np.clip(x, -1.0, 1.0), np.clip(y, -1.0, 1.0), d)


def stats(sm: ShapeMap) -> dict:
    """Summary used by the inspect command and the service."""
    coverage = float(np.count_nonzero(sm.mask)) / (sm.width * sm.height)
    if sm.width >= 2 and sm.height >= 2:
        max_curl = float(np.abs(curl_diagnostic(sm)).max())
    else:
        max_curl = 0.0
    out = {"width": sm.width, "height": sm.height,
           "coverage": coverage, "maxAbsCurl": max_curl}
    for name in ("x", "y", "d"):
        arr = getattr(sm, name)
        out[name] = {"min": float(arr.min()), "max": float(arr.max()),
                     "mean": float(arr.mean())}
    return out


__all__ = [
    "DEFAULT_W", "ShapeMap", "check_w",
    "decode_shape_map", "encode_shape_map", "load_shape_map", "save_shape_map",
    "shape_map_png_bytes", "normal_z", "incident_t", "derive_d_from_z",
    "curl_diagnostic", "resize_shape_map",
    "gen_flat_map", "gen_sphere_map", "gen_rotation_map", "stats",
]
