"""Batch command-line interface.

Every subcommand either succeeds (exit 0, one summary line on stdout)
or fails with a message on stderr and exit code 2.  Outputs are
deterministic: the same inputs and flags produce byte-identical PNGs.
"""

from __future__ import annotations

import json
import sys

import click

from .compositor import (
    BLEND_OPS,
    CLASSIC_OPS,
    LayerStack,
    StackLayer,
    classic_blend,
    composite,
    composite_stack,
    params_from_json,
)
from .imagebuf import read_png, write_png
from .shapemap import (
    derive_d_from_z,
    gen_flat_map,
    gen_rotation_map,
    gen_sphere_map,
    load_shape_map,
    save_shape_map,
    stats,
)

# CLI flag spelling for each JSON parameter key, used to re-map
# validation messages onto the surface the user actually typed.
_FLAG_FOR_KEY = {
    "a": "--a", "eta": "--eta", "w": "--w", "alphaG": "--alpha-g",
    "gloss": "--gloss", "translucencyGain": "--translucency-gain",
    "lightOffset": "--light-offset", "mirror": "--mirror",
    "envTileable": "--env-tileable", "blendOp": "--blend-op",
    "curveNeg": "--fresnel-neg", "curvePos": "--fresnel-pos",
}


class CliError(click.ClickException):
    exit_code = 2


def _fail(message: str) -> "CliError":
    key, sep, rest = str(message).partition(": ")
    if sep and key in _FLAG_FOR_KEY:
        message = f"{_FLAG_FOR_KEY[key]}: {rest}"
    return CliError(str(message))


def _curve_arg(value):
    """Fresnel curve flags take inline JSON or @path-to-json-file."""
    if value is None:
        return None
    text = value
    if value.startswith("@"):
        try:
            with open(value[1:], "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read curve file {value[1:]}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"curve is not valid JSON: {exc}") from None


def _params(a, eta, w, alpha_g, gloss, translucency_gain, light_offset,
            mirror, env_tileable, blend_op, fresnel_neg, fresnel_pos):
    data = {}
    if a is not None:
        data["a"] = a
    if eta is not None:
        data["eta"] = eta
    if w is not None:
        data["w"] = w
    if alpha_g is not None:
        data["alphaG"] = alpha_g
    if gloss is not None:
        data["gloss"] = gloss
    if translucency_gain is not None:
        data["translucencyGain"] = translucency_gain
    if light_offset is not None:
        data["lightOffset"] = list(light_offset)
    if mirror:
        data["mirror"] = True
    if env_tileable:
        data["envTileable"] = True
    if blend_op is not None:
        data["blendOp"] = blend_op
    if fresnel_neg is not None:
        data["curveNeg"] = _curve_arg(fresnel_neg)
    if fresnel_pos is not None:
        data["curvePos"] = _curve_arg(fresnel_pos)
    try:
        return params_from_json(data)
    except ValueError as exc:
        raise _fail(exc) from None


def _param_options(fn):
    opts = [
        click.option("--a", "a", type=float, default=None,
                     help="Refraction strength in [-1, 1] (default 0.5)."),
        click.option("--eta", type=float, default=None,
                     help="Relative index of refraction; sets the strength "
                          "to log2(eta) clamped to [-1, 1]."),
        click.option("--w", type=float, default=None,
                     help="Slope scale in (0, 1] used for the Fresnel angle "
                          "(default 0.5)."),
        click.option("--alpha-g", type=float, default=None,
                     help="Global opacity multiplier in [0, 1]."),
        click.option("--gloss", type=float, default=None,
                     help="Reflection blur amount in [0, 1]."),
        click.option("--translucency-gain", type=float, default=None,
                     help="Background blur per unit of displacement, >= 0."),
        click.option("--light-offset", nargs=2, type=float, default=None,
                     metavar="LX LY",
                     help="Environment lookup offset, components in "
                          "[-0.5, 0.5]."),
        click.option("--mirror", is_flag=True,
                     help="Fully reflective surface (no refraction term)."),
        click.option("--env-tileable", is_flag=True,
                     help="Treat the environment image as tileable."),
        click.option("--blend-op", type=click.Choice(BLEND_OPS), default=None,
                     help="Foreground blend operator (default shape)."),
        click.option("--fresnel-neg", default=None, metavar="JSON|@FILE",
                     help="Reflectivity curve knots for strength -1, as "
                          "[[t, f], ...]."),
        click.option("--fresnel-pos", default=None, metavar="JSON|@FILE",
                     help="Reflectivity curve knots for strength +1."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _load_shape(path, shape_srgb, d_from_z, w):
    try:
        sm = load_shape_map(path, srgb=shape_srgb)
        if d_from_z:
            sm = derive_d_from_z(sm, w)
        return sm
    except (ValueError, OSError) as exc:
        raise _fail(f"cannot load shape map {path}: {exc}") from None


def _load_image(path, label):
    if path is None:
        return None
    try:
        return read_png(path)
    except (ValueError, OSError) as exc:
        raise _fail(f"cannot load {label} {path}: {exc}") from None


def _write_out(path, img):
    try:
        write_png(path, img)
    except OSError as exc:
        raise _fail(f"cannot write {path}: {exc}") from None
    click.echo(f"wrote {path} ({img.width}x{img.height})")


@click.group()
def main():
    """Mock-3D compositing from shape maps."""


@main.command("composite")
@click.option("--shape", "shape_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Shape map PNG (raw channels unless --shape-srgb).")
@click.option("--fg", "fg_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Foreground RGBA PNG; omitted means fully transparent.")
@click.option("--bg", "bg_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Background PNG, same size as the shape map.")
@click.option("--env", "env_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Environment PNG for reflections; omitted means black.")
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Output PNG path.")
@click.option("--shape-srgb", is_flag=True,
              help="Decode the shape map through the sRGB transfer.")
@click.option("--d-from-z", is_flag=True,
              help="Derive thickness from the recovered surface height "
                   "(for normal-map inputs with no thickness channel).")
@_param_options
def composite_cmd(shape_path, fg_path, bg_path, env_path, out_path,
                  shape_srgb, d_from_z, **param_flags):
    """Composite one shape-map layer between a background and foreground."""
    p = _params(**param_flags)
    sm = _load_shape(shape_path, shape_srgb, d_from_z, p.optics.w)
    fg = _load_image(fg_path, "foreground")
    bg = _load_image(bg_path, "background")
    env = _load_image(env_path, "environment")
    try:
        out = composite(sm, fg, bg, env, p)
    except ValueError as exc:
        raise _fail(exc) from None
    _write_out(out_path, out)


@main.command("stack")
@click.option("--layer", "layer_specs", multiple=True, metavar="ROLE=PATH",
              help="Layer as role=path, bottom first; roles: image, shape, "
                   "foreground.  Repeat per layer; exactly one shape layer.")
@click.option("--eye-index", type=int, default=0, show_default=True,
              help="Layers listed before this position sit behind the "
                   "surface; the rest face the eye.")
@click.option("--env", "env_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Environment PNG for reflections.")
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Output PNG path.")
@click.option("--shape-srgb", is_flag=True,
              help="Decode the shape map through the sRGB transfer.")
@click.option("--d-from-z", is_flag=True,
              help="Derive thickness from the recovered surface height.")
@_param_options
def stack_cmd(layer_specs, eye_index, env_path, out_path, shape_srgb,
              d_from_z, **param_flags):
    """Composite an ordered multi-layer stack in one pass."""
    p = _params(**param_flags)
    if not layer_specs:
        raise CliError("at least one --layer is required")
    layers = []
    for spec in layer_specs:
        role, sep, path = spec.partition("=")
        if not sep or role not in ("image", "shape", "foreground"):
            raise CliError(f"bad layer {spec!r}: expected role=path with "
                           "role one of image, shape, foreground")
        if role == "shape":
            content = _load_shape(path, shape_srgb, d_from_z, p.optics.w)
        else:
            content = _load_image(path, f"{role} layer")
        try:
            layers.append(StackLayer(content, role))
        except ValueError as exc:
            raise _fail(exc) from None
    env = _load_image(env_path, "environment")
    try:
        stack = LayerStack(tuple(layers), eye_index)
        out = composite_stack(stack, env, p)
    except ValueError as exc:
        raise _fail(exc) from None
    _write_out(out_path, out)


@main.command("blend")
@click.option("--op", required=True, type=click.Choice(CLASSIC_OPS),
              help="Classical blend operator.")
@click.option("--fg", "fg_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--bg", "bg_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha-g", type=float, default=1.0, show_default=True,
              help="Global opacity multiplier in [0, 1].")
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Output PNG path.")
def blend_cmd(op, fg_path, bg_path, alpha_g, out_path):
    """Blend two images with a classical operator (no shape map)."""
    fg = _load_image(fg_path, "foreground")
    bg = _load_image(bg_path, "background")
    try:
        out = classic_blend(op, fg, bg, alpha_g)
    except ValueError as exc:
        raise _fail(exc) from None
    _write_out(out_path, out)


@main.command("inspect")
@click.option("--shape", "shape_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--shape-srgb", is_flag=True,
              help="Decode the shape map through the sRGB transfer.")
@click.option("--json", "as_json", is_flag=True,
              help="Emit machine-readable statistics.")
def inspect_cmd(shape_path, shape_srgb, as_json):
    """Print shape-map statistics (size, coverage, field ranges, curl)."""
    sm = _load_shape(shape_path, shape_srgb, False, None)
    info = stats(sm)
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
        return
    click.echo(f"shape map {info['width']}x{info['height']}")
    click.echo(f"coverage: {100.0 * info['coverage']:.1f}% of texels in the object")
    for ch in ("x", "y", "d"):
        c = info[ch]
        click.echo(f"{ch}: min {c['min']:+.4f}  max {c['max']:+.4f}  "
                   f"mean {c['mean']:+.4f}")
    click.echo(f"max |curl|: {info['maxAbsCurl']:.6g}")


@main.command("fixture")
@click.option("--kind", required=True,
              type=click.Choice(["flat", "sphere", "rotation"]),
              help="Procedural shape map to generate.")
@click.option("--size", type=int, required=True, help="Output side length.")
@click.option("--radius", type=float, default=1.0, show_default=True,
              help="Sphere radius as a fraction of the half-width.")
@click.option("--thickness-scale", type=float, default=1.0, show_default=True,
              help="Multiplier on the sphere thickness channel.")
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Output PNG path.")
def fixture_cmd(kind, size, radius, thickness_scale, out_path):
    """Write a procedural shape-map PNG (flat, sphere or rotation field)."""
    try:
        if kind == "flat":
            sm = gen_flat_map(size)
        elif kind == "sphere":
            sm = gen_sphere_map(size, radius=radius,
                                thickness_scale=thickness_scale)
        else:
            sm = gen_rotation_map(size)
        save_shape_map(out_path, sm)
    except ValueError as exc:
        raise _fail(exc) from None
    except OSError as exc:
        raise _fail(f"cannot write {out_path}: {exc}") from None
    click.echo(f"wrote {out_path} ({sm.width}x{sm.height})")


if __name__ == "__main__":
    main()
