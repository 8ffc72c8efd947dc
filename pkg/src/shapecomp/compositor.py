"""Whole-image compositing with shape maps.

Evaluates, per pixel,

    CI = alpha * H(FI, X) + (1 - alpha) * X,
    X  = f * R(EI) + (1 - f) * T(BI),
    alpha = alpha_g * alpha_fi,

where R samples the reflected environment (optionally glossy via a blur
pyramid), T samples the displaced background (optionally translucent),
f is the Fresnel blend and H is the layer blend operator (plain
foreground by default).  Outside the object mask (d = 0) the surface
does not exist: f is forced to 0 and the displacement vanishes, so such
pixels reduce to a classical blend with the untouched background.

Refraction lookups run in pixel coordinates so that a zero displacement
is the exact identity, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .imagebuf import (
    BlurPyramid,
    EdgeMode,
    RasterImage,
    build_pyramid,
    sample_blurred,
    sample_blurred_px,
)
from .optics import OpticsParams, fresnel
from .shapemap import ShapeMap, incident_t

DEFAULT_LEVEL_COUNT = 6
BLEND_OPS = ("shape", "over", "multiply", "add")
CLASSIC_OPS = ("over", "multiply", "add")


@dataclass(frozen=True)
class CompositeParams:
    """All user-steerable knobs for one composite."""

    optics: OpticsParams = field(default_factory=OpticsParams)
    alpha_g: float = 1.0
    gloss: float = 0.0
    translucency_gain: float = 0.0
    env_tileable: bool = False
    blend_op: str = "shape"
    level_count: int = DEFAULT_LEVEL_COUNT

    def __post_init__(self):
        if not 0.0 <= self.alpha_g <= 1.0:
            raise ValueError(f"alpha_g must lie in [0, 1], got {self.alpha_g}")
        if not 0.0 <= self.gloss <= 1.0:
            raise ValueError(f"gloss must lie in [0, 1], got {self.gloss}")
        if self.translucency_gain < 0.0:
            raise ValueError(f"translucency_gain must be >= 0, got {self.translucency_gain}")
        if self.blend_op not in BLEND_OPS:
            raise ValueError(f"blend_op must be one of {BLEND_OPS}, got {self.blend_op!r}")
        if self.level_count < 1:
            raise ValueError("level_count must be >= 1")


@dataclass(frozen=True)
class StackLayer:
    """One entry of a layer stack: an image or the (single) shape map."""

    content: Union[RasterImage, ShapeMap]
    role: str = "image"

    def __post_init__(self):
        if self.role not in ("image", "shape", "foreground"):
            raise ValueError(f"unknown layer role {self.role!r}")
        want = ShapeMap if self.role == "shape" else RasterImage
        if not isinstance(self.content, want):
            raise ValueError(f"layer role {self.role!r} needs a {want.__name__}")


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers, bottom (deepest background) first.

    ``eye_index`` splits the image layers: positions below it sit on
    the background side of the eye (seen through the surface, so they
    refract); positions at or above it sit on the eye side (mirrored by
    the surface over the environment).  Exactly one layer carries the
    shape map; layers tagged ``foreground`` collapse into the composite
    foreground.
    """

    layers: tuple[StackLayer, ...]
    eye_index: int = 0

    def __post_init__(self):
        layers = tuple(self.layers)
        if len(layers) == 0:
            raise ValueError("stack needs at least one layer")
        n_shape = sum(1 for l in layers if l.role == "shape")
        if n_shape != 1:
            raise ValueError(f"stack needs exactly one shape layer, got {n_shape}")
        if not 0 <= self.eye_index <= len(layers):
            raise ValueError(f"eye_index {self.eye_index} outside [0, {len(layers)}]")
        object.__setattr__(self, "layers", layers)


# ---------------------------------------------------------------------------
# Pyramid sizing: levels above 0 are built only when a knob can reach them.

def glossy_level(p: CompositeParams) -> float:
    return p.gloss * (p.level_count - 1)


def translucency_levels(p: CompositeParams, sm: ShapeMap) -> np.ndarray:
    """Per-texel background blur level from the displacement magnitude."""
    blur = p.translucency_gain * abs(p.optics.a) * sm.d * np.hypot(sm.x, sm.y)
    return np.clip(np.log2(1.0 + blur), 0.0, float(p.level_count - 1))


def required_env_levels(p: CompositeParams) -> int:
    return min(int(math.ceil(glossy_level(p))) + 1, p.level_count)


def required_bg_levels(p: CompositeParams, sm: ShapeMap) -> int:
    if p.translucency_gain == 0.0 or p.optics.a == 0.0:
        return 1
    top = float(translucency_levels(p, sm).max())
    return min(int(math.ceil(top)) + 1, p.level_count)


# ---------------------------------------------------------------------------
# Core kernel

def _blend_operator(op: str, fg_rgb, x_rgb):
    if op in ("shape", "over"):
        return fg_rgb
    if op == "multiply":
        return fg_rgb * x_rgb
    if op == "add":
        return np.minimum(fg_rgb + x_rgb, 1.0)
    raise ValueError(f"unknown blend operator {op!r}")


def _composite_arrays(sm: ShapeMap, fg: Optional[RasterImage],
                      bg_pyr: BlurPyramid, env_pyr: BlurPyramid,
                      px, py, p: CompositeParams) -> np.ndarray:
    """Evaluate the compositing equation; (px, py) are the background
    pixel coordinates owned by each evaluated texel.  Returns (..., 3)."""
    opt = p.optics
    x, y, d = sm.x, sm.y, sm.d
    mask = d != 0.0
    any_surface = bool(mask.any())

    # Fresnel, dead outside the mask so empty regions never reflect
    if any_surface:
        f = fresnel(incident_t(x, y, opt.w), opt.a, opt.curve_neg, opt.curve_pos,
                    mirror=opt.mirror)
        f = np.where(mask, f, 0.0)[..., None]
    else:
        f = np.zeros(x.shape + (1,), dtype=np.float64)

    # reflection (glossy via constant pyramid level)
    if any_surface:
        env_mode = EdgeMode.WRAP if p.env_tileable else EdgeMode.CLAMP
        lx, ly = opt.light_offset
        eu = np.clip(0.5 * x + 0.5 + lx, 0.0, 1.0)
        ev = np.clip(0.5 * y + 0.5 + ly, 0.0, 1.0)
        refl = sample_blurred(env_pyr, eu, ev, glossy_level(p), env_mode)[..., :3]
    else:
        refl = np.zeros(x.shape + (3,), dtype=np.float64)

    # refraction (translucent via per-texel level); zero displacement is
    # the exact identity because a*d*x underflows to literal zero there
    ad = opt.a * d
    sx = px - ad * x * (bg_pyr.levels[0].width - 1)
    sy = py - ad * y * (bg_pyr.levels[0].height - 1)
    if p.translucency_gain == 0.0 or opt.a == 0.0:
        bg_level = 0.0  # scalar keeps the single-level fast path
    else:
        bg_level = translucency_levels(p, sm)
    refr = sample_blurred_px(bg_pyr, sx, sy, bg_level, EdgeMode.CLAMP)[..., :3]

    mixed = f * refl + (1.0 - f) * refr
    if fg is None:  # alpha == 0 everywhere, the blend is the identity
        return np.clip(mixed, 0.0, 1.0)

    alpha = (p.alpha_g * fg.pixels[..., 3])[..., None]
    fg_rgb = fg.pixels[..., :3]
    out = alpha * _blend_operator(p.blend_op, fg_rgb, mixed) + (1.0 - alpha) * mixed
    return np.clip(out, 0.0, 1.0)


def composite(sm: ShapeMap, fg: Optional[RasterImage], bg: RasterImage,
              env: Optional[RasterImage] = None,
              p: CompositeParams = None) -> RasterImage:
    """Composite one shape-map layer over a background.

    ``fg`` may be None (fully transparent foreground) and ``env`` may
    be None (black environment) or differ in size from the map; the
    background must match the map's dimensions.  The output is opaque
    and matches the map's dimensions.
    """
    p = p if p is not None else CompositeParams()
    for name, img in (("fg", fg), ("bg", bg)):
        if img is not None and (img.width != sm.width or img.height != sm.height):
            raise ValueError(
                f"{name} is {img.width}x{img.height} but the shape map is "
                f"{sm.width}x{sm.height}")
    if env is None:
        env = RasterImage.full(1, 1, (0.0, 0.0, 0.0, 1.0))

    bg_pyr = build_pyramid(bg, required_bg_levels(p, sm))
    env_mode = EdgeMode.WRAP if p.env_tileable else EdgeMode.CLAMP
    env_pyr = build_pyramid(env, required_env_levels(p), env_mode)

    jj, ii = np.meshgrid(np.arange(sm.width, dtype=np.float64),
                         np.arange(sm.height, dtype=np.float64))
    rgb = _composite_arrays(sm, fg, bg_pyr, env_pyr, jj, ii, p)

    out = np.empty((sm.height, sm.width, 4), dtype=np.float64)
    out[..., :3] = rgb
    out[..., 3] = 1.0
    return RasterImage(out)


def composite_pixel(sm_texel: tuple[float, float, float], fi: tuple[float, float, float, float],
                    bg_pyr: BlurPyramid, env_pyr: BlurPyramid,
                    u: float, v: float, p: CompositeParams) -> tuple[float, float, float]:
    """Single-texel form of the compositing equation.

    ``sm_texel`` is (x, y, d); ``fi`` the foreground rgba at this pixel
    (None for no foreground); (u, v) the pixel's own texel-center
    coordinate inside the background.  Runs the same kernel as
    :func:`composite`.
    """
    x, y, d = sm_texel
    sm = ShapeMap(np.array([[x]]), np.array([[y]]), np.array([[d]]))
    fg = None
    if fi is not None:
        r, g, b, a = fi
        fg = RasterImage(np.array([[[r, g, b, a]]], dtype=np.float64))
    px = float(u) * (bg_pyr.levels[0].width - 1)
    py = float(v) * (bg_pyr.levels[0].height - 1)
    rgb = _composite_arrays(sm, fg, bg_pyr, env_pyr,
                            np.array([[px]]), np.array([[py]]), p)
    return tuple(float(c) for c in rgb[0, 0])


# ---------------------------------------------------------------------------
# Classical two-image blending

def classic_blend(op: str, fg: RasterImage, bg: RasterImage,
                  alpha_g: float = 1.0) -> RasterImage:
    """CI = alpha * H(FI, BI) + (1 - alpha) * BI with alpha = alpha_g * fg.alpha."""
    if op not in CLASSIC_OPS:
        raise ValueError(f"op must be one of {CLASSIC_OPS}, got {op!r}")
    if not 0.0 <= alpha_g <= 1.0:
        raise ValueError(f"alpha_g must lie in [0, 1], got {alpha_g}")
    if fg.width != bg.width or fg.height != bg.height:
        raise ValueError(
            f"fg is {fg.width}x{fg.height} but bg is {bg.width}x{bg.height}")
    alpha = (alpha_g * fg.pixels[..., 3])[..., None]
    fg_rgb = fg.pixels[..., :3]
    bg_rgb = bg.pixels[..., :3]
    if op == "over":
        h = fg_rgb
    elif op == "multiply":
        h = fg_rgb * bg_rgb
    else:
        h = np.minimum(fg_rgb + bg_rgb, 1.0)
    out = np.empty_like(fg.pixels)
    out[..., :3] = np.clip(alpha * h + (1.0 - alpha) * bg_rgb, 0.0, 1.0)
    out[..., 3] = 1.0
    return RasterImage(out)


# ---------------------------------------------------------------------------
# Multi-layer stacks

def _over_collapse(images: list[RasterImage]) -> RasterImage:
    """Straight-alpha over, bottom first; a single layer passes through."""
    acc = images[0]
    for top in images[1:]:
        fa = top.pixels[..., 3:4]
        ba = acc.pixels[..., 3:4]
        out_a = fa + ba * (1.0 - fa)
        safe = np.maximum(out_a, 1e-12)
        rgb = (fa * top.pixels[..., :3] + ba * (1.0 - fa) * acc.pixels[..., :3]) / safe
        rgb = np.where(out_a > 0.0, rgb, 0.0)
        px = np.concatenate([np.clip(rgb, 0.0, 1.0), out_a], axis=2)
        acc = RasterImage(np.clip(px, 0.0, 1.0))
    return acc


def collapse_stack(stack: LayerStack, env: Optional[RasterImage] = None):
    """Reduce a stack to the (sm, fg, bg, env) of the three-image equation.

    Image layers below the eye index become the effective background;
    those at or above it are merged over the environment into the
    effective environment.  Foreground layers merge into the effective
    foreground.
    """
    sm = None
    fgs, bg_side, eye_side = [], [], []
    for idx, layer in enumerate(stack.layers):
        if layer.role == "shape":
            sm = layer.content
        elif layer.role == "foreground":
            fgs.append(layer.content)
        elif idx < stack.eye_index:
            bg_side.append(layer.content)
        else:
            eye_side.append(layer.content)

    fg = _over_collapse(fgs) if fgs else None
    if not bg_side:
        bg = RasterImage.full(sm.width, sm.height, (0.0, 0.0, 0.0, 1.0))
    else:
        bg = _over_collapse(bg_side)

    if eye_side:
        if env is not None:
            if env.width != eye_side[0].width or env.height != eye_side[0].height:
                raise ValueError("env must match layer dimensions when eye-side "
                                 "layers are present")
            eff_env = _over_collapse([env] + eye_side)
        else:
            eff_env = _over_collapse(eye_side)
    else:
        eff_env = env
    return sm, fg, bg, eff_env


def composite_stack(stack: LayerStack, env: Optional[RasterImage] = None,
                    p: CompositeParams = None) -> RasterImage:
    """Collapse the stack and run the three-image equation once."""
    sm, fg, bg, eff_env = collapse_stack(stack, env)
    return composite(sm, fg, bg, eff_env, p)


# ---------------------------------------------------------------------------
# JSON parameter codec, shared by the CLI and the HTTP service.
#
# Errors are ValueError whose message starts with the offending JSON key
# followed by ": ", so callers can surface or re-map the field name.

PARAM_KEYS = ("a", "eta", "w", "alphaG", "gloss", "translucencyGain",
              "lightOffset", "mirror", "envTileable", "blendOp",
              "curveNeg", "curvePos")


def params_to_json(p: CompositeParams) -> dict:
    """Serializable view of all user-steerable parameters."""
    return {
        "a": p.optics.a,
        "w": p.optics.w,
        "alphaG": p.alpha_g,
        "gloss": p.gloss,
        "translucencyGain": p.translucency_gain,
        "lightOffset": [p.optics.light_offset[0], p.optics.light_offset[1]],
        "mirror": p.optics.mirror,
        "envTileable": p.env_tileable,
        "blendOp": p.blend_op,
        "curveNeg": p.optics.curve_neg.to_json(),
        "curvePos": p.optics.curve_pos.to_json(),
    }


def _json_number(data, key, lo, hi, default, lo_open=False):
    if key not in data or data[key] is None:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{key}: expected a number")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"{key}: must be finite")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        bound = f"({lo}" if lo_open else f"[{lo}"
        raise ValueError(f"{key}: must lie in {bound}, {hi if hi is not None else 'inf'}]")
    if hi is not None and v > hi:
        lo_txt = lo if lo is not None else "-inf"
        raise ValueError(f"{key}: must lie in [{lo_txt}, {hi}]")
    return v


def _json_bool(data, key, default):
    if key not in data or data[key] is None:
        return default
    v = data[key]
    if not isinstance(v, bool):
        raise ValueError(f"{key}: expected true or false")
    return v


def params_from_json(data) -> CompositeParams:
    """Build CompositeParams from a JSON-style mapping, strictly validated.

    Unknown keys are rejected; ``eta`` is accepted instead of ``a`` (the
    refraction strength becomes log2(eta) clamped to [-1, 1]) but not
    alongside it.
    """
    from .optics import a_from_eta, default_curve_neg, default_curve_pos
    from .optics import FresnelCurve

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError("params: expected an object")
    for key in data:
        if key not in PARAM_KEYS:
            raise ValueError(f"{key}: unknown parameter")

    has_a = data.get("a") is not None
    has_eta = data.get("eta") is not None
    if has_a and has_eta:
        raise ValueError("eta: cannot combine with a")
    if has_eta:
        eta = _json_number(data, "eta", None, None, None)
        if eta <= 0.0:
            raise ValueError("eta: must be > 0")
        a = a_from_eta(eta)
    else:
        a = _json_number(data, "a", -1.0, 1.0, 0.5)

    w = _json_number(data, "w", 0.0, 1.0, None, lo_open=True)
    alpha_g = _json_number(data, "alphaG", 0.0, 1.0, 1.0)
    gloss = _json_number(data, "gloss", 0.0, 1.0, 0.0)
    gain = _json_number(data, "translucencyGain", 0.0, None, 0.0)
    mirror = _json_bool(data, "mirror", False)
    env_tileable = _json_bool(data, "envTileable", False)

    offset = data.get("lightOffset")
    if offset is None:
        light_offset = (0.0, 0.0)
    else:
        if (not isinstance(offset, (list, tuple)) or len(offset) != 2
                or any(isinstance(c, bool) or not isinstance(c, (int, float))
                       for c in offset)):
            raise ValueError("lightOffset: expected a pair of numbers")
        lx, ly = float(offset[0]), float(offset[1])
        if not (math.isfinite(lx) and math.isfinite(ly)):
            raise ValueError("lightOffset: must be finite")
        if not (-0.5 <= lx <= 0.5 and -0.5 <= ly <= 0.5):
            raise ValueError("lightOffset: components must lie in [-0.5, 0.5]")
        light_offset = (lx, ly)

    blend_op = data.get("blendOp")
    if blend_op is None:
        blend_op = "shape"
    elif not isinstance(blend_op, str) or blend_op not in BLEND_OPS:
        raise ValueError(f"blendOp: must be one of {', '.join(BLEND_OPS)}")

    def curve(key, fallback):
        raw = data.get(key)
        if raw is None:
            return fallback()
        try:
            return FresnelCurve.from_json(raw)
        except ValueError as exc:
            raise ValueError(f"{key}: {exc}") from None

    curve_neg = curve("curveNeg", default_curve_neg)
    curve_pos = curve("curvePos", default_curve_pos)

    optics_kwargs = dict(a=a, light_offset=light_offset, mirror=mirror,
                         curve_neg=curve_neg, curve_pos=curve_pos)
    if w is not None:
        optics_kwargs["w"] = w
    return CompositeParams(
        optics=OpticsParams(**optics_kwargs),
        alpha_g=alpha_g, gloss=gloss, translucency_gain=gain,
        env_tileable=env_tileable, blend_op=blend_op)


__all__ = [
    "DEFAULT_LEVEL_COUNT", "BLEND_OPS", "CLASSIC_OPS", "PARAM_KEYS",
    "CompositeParams", "StackLayer", "LayerStack",
    "glossy_level", "translucency_levels",
    "required_env_levels", "required_bg_levels",
    "composite", "composite_pixel", "classic_blend",
    "collapse_stack", "composite_stack",
    "params_to_json", "params_from_json",
]
