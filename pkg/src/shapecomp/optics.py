"""The three per-texel optical mappings: reflection, refraction, Fresnel.

All three are deliberately linearized stand-ins for the physical
phenomena, built for predictable artistic steering rather than
correctness: reflection is a square gazing-ball lookup, refraction a
displacement proportional to thickness, and Fresnel an interpolation
between two user-drawn curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .shapemap import DEFAULT_W, check_w


@dataclass(frozen=True)
class FresnelCurve:
    """Piecewise-linear curve over the incident parameter t in [0, 1].

    Knots are (t, f) pairs with t strictly ascending from 0 to 1 and
    f in [0, 1].
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(t), float(f)) for t, f in self.knots)
        if len(knots) < 2:
            raise ValueError("curve needs at least 2 knots")
        ts = [t for t, _ in knots]
        if ts[0] != 0.0 or ts[-1] != 1.0:
            raise ValueError("first knot must sit at t=0 and last at t=1")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("knot t values must be strictly ascending")
        if any(not 0.0 <= f <= 1.0 for _, f in knots):
            raise ValueError("knot f values must lie in [0, 1]")
        object.__setattr__(self, "knots", knots)

    def __call__(self, t):
        return eval_fresnel_curve(self, t)

    def to_json(self) -> list[list[float]]:
        return [[t, f] for t, f in self.knots]

    @classmethod
    def from_json(cls, data) -> "FresnelCurve":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            knots = tuple((float(p[0]), float(p[1])) for p in data)
        except (TypeError, ValueError, IndexError) as exc:
            raise ValueError(f"curve must be a [[t, f], ...] array: {exc}") from None
        return cls(knots)


def default_curve_pos() -> FresnelCurve:
    # glass-like: faint head-on reflection brightening toward grazing
    return FresnelCurve(((0.0, 0.04), (0.7, 0.12), (1.0, 1.0)))


def default_curve_neg() -> FresnelCurve:
    return FresnelCurve(((0.0, 0.04), (0.5, 0.5), (1.0, 1.0)))


def constant_curve(value: float) -> FresnelCurve:
    return FresnelCurve(((0.0, float(value)), (1.0, float(value))))


@dataclass(frozen=True)
class OpticsParams:
    """Per-composite optical knobs.

    ``a`` is the pseudo refraction index in [-1, 1] (log2 of the
    refractive ratio); out-of-range values are clamped on construction.
    ``light_offset`` shifts the reflected environment in tandem with an
    imagined light position.  ``mirror`` overrides the Fresnel term to 1.
    """

    a: float = 0.5
    w: float = DEFAULT_W
    light_offset: tuple[float, float] = (0.0, 0.0)
    curve_neg: FresnelCurve = field(default_factory=default_curve_neg)
    curve_pos: FresnelCurve = field(default_factory=default_curve_pos)
    mirror: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", float(np.clip(self.a, -1.0, 1.0)))
        object.__setattr__(self, "w", check_w(self.w))
        lx, ly = self.light_offset
        lx = float(np.clip(lx, -0.5, 0.5))
        ly = float(np.clip(ly, -0.5, 0.5))
        object.__setattr__(self, "light_offset", (lx, ly))


# ---------------------------------------------------------------------------
# Mappings

def reflect_uv(x, y, light_offset=(0.0, 0.0)):
    """Square gazing-ball reflection: (x, y) -> environment (u, v).

    The whole field [-1, 1]^2 maps onto the unit square, shifted by the
    light offset and clamped so lookups stay inside the environment.
    """
    lx, ly = light_offset
    u = np.clip(0.5 * np.asarray(x, dtype=np.float64) + 0.5 + lx, 0.0, 1.0)
    v = np.clip(0.5 * np.asarray(y, dtype=np.float64) + 0.5 + ly, 0.0, 1.0)
    return u, v


def refract_uv(u, v, x, y, d, a):
    """Thickness-scaled refraction displacement: (u, v) - a d (x, y).

    The result is intentionally unclamped; the sampler's edge mode
    decides what out-of-range coordinates mean.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    ad = np.asarray(a, dtype=np.float64) * np.asarray(d, dtype=np.float64)
    return u - ad * np.asarray(x, dtype=np.float64), v - ad * np.asarray(y, dtype=np.float64)


def a_from_eta(eta: float) -> float:
    """Physical refractive ratio -> pseudo index: clamp(log2(eta), -1, 1)."""
    eta = float(eta)
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    return float(np.clip(math.log2(eta), -1.0, 1.0))


def eval_fresnel_curve(curve: FresnelCurve, t):
    """Piecewise-linear evaluation, t clamped to [0, 1], exact at knots."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    ts = np.array([k[0] for k in curve.knots])
    fs = np.array([k[1] for k in curve.knots])
    return np.interp(t, ts, fs)


def fresnel(t, a, curve_neg: FresnelCurve, curve_pos: FresnelCurve,
            mirror: bool = False):
    """Blend weight between reflection and refraction.

    Convex interpolation of the two endpoint curves:
    f = (1 - a)/2 * curve_neg(t) + (1 + a)/2 * curve_pos(t), so a = -1
    and a = +1 reproduce their curves exactly and the output stays in
    [0, 1].  Perfect mirrors short-circuit to f = 1.
    """
    t = np.asarray(t, dtype=np.float64)
    if mirror:
        return np.ones_like(t)
    a = np.clip(np.asarray(a, dtype=np.float64), -1.0, 1.0)
    w_neg = 0.5 * (1.0 - a)
    w_pos = 0.5 * (1.0 + a)
    return w_neg * eval_fresnel_curve(curve_neg, t) + w_pos * eval_fresnel_curve(curve_pos, t)


__all__ = [
    "FresnelCurve", "OpticsParams",
    "default_curve_pos", "default_curve_neg", "constant_curve",
    "reflect_uv", "refract_uv", "a_from_eta", "eval_fresnel_curve", "fresnel",
]
