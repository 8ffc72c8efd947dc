"""Unit tests for the shape-map container, codec, geometry and fixtures."""

import math

import numpy as np
import pytest

from shapecomp.imagebuf import RasterImage, from_bytes_u8, to_bytes_u8
from shapecomp.shapemap import (
    DEFAULT_W,
    ShapeMap,
    check_w,
    curl_diagnostic,
    decode_shape_map,
    derive_d_from_z,
    encode_shape_map,
    gen_flat_map,
    gen_rotation_map,
    gen_sphere_map,
    incident_t,
    load_shape_map,
    normal_z,
    resize_shape_map,
    save_shape_map,
    shape_map_png_bytes,
    stats,
)


def _random_map(rng, w, h):
    return ShapeMap(rng.uniform(-1.0, 1.0, (h, w)),
                    rng.uniform(-1.0, 1.0, (h, w)),
                    rng.uniform(0.0, 1.0, (h, w)))


# ---------------------------------------------------------------------------
# Container

def test_shape_map_accepts_valid_fields():
    sm = _random_map(np.random.default_rng(1), 4, 3)
    assert sm.width == 4 and sm.height == 3


def test_shape_map_rejects_out_of_range():
    z = np.zeros((2, 2))
    with pytest.raises(ValueError):
        ShapeMap(np.full((2, 2), 1.5), z, z)
    with pytest.raises(ValueError):
        ShapeMap(z, z, np.full((2, 2), -0.1))
    with pytest.raises(ValueError):
        ShapeMap(z, np.full((2, 2), np.nan), z)


def test_shape_map_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        ShapeMap(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_mask_is_nonzero_thickness():
    x = np.zeros((2, 2))
    d = np.array([[0.0, 0.5], [1.0, 0.0]])
    sm = ShapeMap(x, x, d)
    assert np.array_equal(sm.mask, d != 0.0)


def test_shape_map_is_immutable():
    sm = gen_flat_map(4)
    with pytest.raises(ValueError):
        sm.x[0, 0] = 1.0


def test_check_w_bounds():
    assert check_w(1.0) == 1.0
    assert check_w(DEFAULT_W) == 0.5
    for bad in (0.0, -0.5, 1.01):
        with pytest.raises(ValueError):
            check_w(bad)


# ---------------------------------------------------------------------------
# Codec: (r, g, b) = ((x+1)/2, (y+1)/2, d) on raw channels

def test_codec_known_values():
    px = np.zeros((1, 3, 4))
    px[0, 0] = [0.5, 0.5, 0.0, 1.0]   # x = 0, y = 0, empty
    px[0, 1] = [1.0, 0.0, 1.0, 1.0]   # x = +1, y = -1, full thickness
    px[0, 2] = [0.25, 0.75, 0.5, 1.0]
    sm = decode_shape_map(RasterImage(px))
    np.testing.assert_allclose(sm.x[0], [0.0, 1.0, -0.5], atol=1e-15)
    np.testing.assert_allclose(sm.y[0], [0.0, -1.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(sm.d[0], [0.0, 1.0, 0.5], atol=1e-15)


def test_codec_roundtrip_in_memory():
    rng = np.random.default_rng(2)
    sm = _random_map(rng, 16, 16)
    back = decode_shape_map(encode_shape_map(sm))
    np.testing.assert_allclose(back.x, sm.x, atol=1e-15)
    np.testing.assert_allclose(back.y, sm.y, atol=1e-15)
    np.testing.assert_allclose(back.d, sm.d, atol=1e-15)


def test_codec_ignores_alpha():
    px = np.zeros((2, 2, 4))
    px[..., 0] = 0.75
    px[..., 2] = 1.0
    sm_opaque = decode_shape_map(RasterImage(px))
    px2 = px.copy()
    px2[..., 3] = 1.0
    sm_alpha = decode_shape_map(RasterImage(px2))
    assert np.array_equal(sm_opaque.x, sm_alpha.x)
    assert np.array_equal(sm_opaque.d, sm_alpha.d)


def test_codec_file_roundtrip_within_one_byte(tmp_path):
    rng = np.random.default_rng(3)
    sm = _random_map(rng, 24, 24)
    path = tmp_path / "map.png"
    save_shape_map(path, sm)
    back = load_shape_map(str(path))
    # 8-bit storage: x and y quantize to 2/255 steps, d to 1/255
    assert np.abs(back.x - sm.x).max() <= 1.0 / 255.0 + 1e-12
    assert np.abs(back.y - sm.y).max() <= 1.0 / 255.0 + 1e-12
    assert np.abs(back.d - sm.d).max() <= 0.5 / 255.0 + 1e-12


def test_codec_file_second_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(4)
    sm = _random_map(rng, 12, 12)
    first = tmp_path / "a.png"
    second = tmp_path / "b.png"
    save_shape_map(first, sm)
    save_shape_map(second, load_shape_map(str(first)))
    assert first.read_bytes() == second.read_bytes()


def test_shape_map_bytes_skip_srgb_transfer():
    # raw storage: byte 128 must decode to 128/255, not through the curve
    sm = gen_sphere_map(8)
    raw = to_bytes_u8(encode_shape_map(sm), srgb=False)
    back = load_shape_map(shape_map_png_bytes(sm))
    np.testing.assert_allclose(back.x, raw[..., 0] / 255.0 * 2.0 - 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# Surface geometry

def test_normal_z_oracles():
    # z = sqrt(1 - w^2 (x^2 + y^2)) at w = 1/2
    assert normal_z(0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert normal_z(1.0, 0.0) == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert normal_z(1.0, 1.0) == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_normal_z_floor_at_default_w():
    # the default slope scale keeps z >= 1/sqrt(2) over the whole square
    rng = np.random.default_rng(5)
    x = rng.uniform(-1.0, 1.0, 1000)
    y = rng.uniform(-1.0, 1.0, 1000)
    assert normal_z(x, y).min() >= 1.0 / math.sqrt(2.0) - 1e-12


def test_normal_z_clamps_at_zero_for_large_w():
    assert normal_z(1.0, 1.0, w=1.0) == 0.0


def test_incident_t_oracle():
    # 1 - sqrt(3)/2 at the steepest single-axis slope, w = 1/2
    assert incident_t(1.0, 0.0) == pytest.approx(0.1339745962155614, abs=1e-15)
    assert incident_t(0.0, 0.0) == 0.0


def test_incident_t_range():
    rng = np.random.default_rng(6)
    t = incident_t(rng.uniform(-1, 1, 500), rng.uniform(-1, 1, 500), w=1.0)
    assert t.min() >= 0.0 and t.max() <= 1.0


def test_derive_d_from_z_recovers_height():
    sm = gen_sphere_map(33)
    flat_d = ShapeMap(sm.x, sm.y, np.where(sm.mask, 1.0, 0.0))
    derived = derive_d_from_z(flat_d, 1.0)
    # with w = 1 the recovered z equals the true sphere normal z
    inside = sm.d > 0.05
    np.testing.assert_allclose(derived.d[inside], sm.d[inside], atol=1e-12)


# ---------------------------------------------------------------------------
# Curl diagnostic

def test_curl_zero_for_uniform_field():
    sm = ShapeMap(np.full((8, 8), 0.3), np.full((8, 8), -0.2), np.ones((8, 8)))
    assert np.abs(curl_diagnostic(sm)).max() == 0.0


def test_curl_zero_for_discrete_gradient_field():
    # central differences commute, so a discrete gradient is curl-free
    rng = np.random.default_rng(7)
    h = rng.random((16, 16))
    gu = np.zeros_like(h)
    gv = np.zeros_like(h)
    gu[:, 1:-1] = (h[:, 2:] - h[:, :-2]) * 0.5
    gv[1:-1, :] = (h[2:, :] - h[:-2, :]) * 0.5
    sm = ShapeMap(np.clip(gu, -1, 1), np.clip(gv, -1, 1), np.ones_like(h))
    assert np.abs(curl_diagnostic(sm)[2:-2, 2:-2]).max() < 1e-14


def test_curl_of_rotation_field_is_constant():
    # x = 2(v - 1/2), y = -2(u - 1/2): dy/du - dx/dv = -2 - 2 = -4
    sm = gen_rotation_map(33)
    interior = curl_diagnostic(sm)[1:-1, 1:-1]
    np.testing.assert_allclose(interior, -4.0, atol=1e-12)


def test_curl_scales_with_field_strength():
    sm = gen_rotation_map(17)
    half = ShapeMap(0.5 * sm.x, 0.5 * sm.y, sm.d)
    np.testing.assert_allclose(curl_diagnostic(half)[1:-1, 1:-1], -2.0,
                               atol=1e-12)


def test_curl_rejects_tiny_maps():
    with pytest.raises(ValueError):
        curl_diagnostic(gen_flat_map(1))
    assert np.all(curl_diagnostic(ShapeMap(np.zeros((2, 2)), np.zeros((2, 2)),
                                           np.zeros((2, 2)))) == 0.0)


def test_curl_converges_for_analytic_gradient():
    # gradient of h = sqrt(4 - X^2 - Y^2): smooth, so the discretization
    # error of the central-difference stencil must shrink as resolution grows
    errs = []
    for n in (32, 64, 128):
        lin = np.linspace(-1.0, 1.0, n)
        gx, gy = np.meshgrid(lin, lin)
        r2 = gx * gx + gy * gy
        hx = -gx / np.sqrt(4.0 - r2)
        hy = -gy / np.sqrt(4.0 - r2)
        sm = ShapeMap(np.clip(hx, -1, 1), np.clip(hy, -1, 1),
                      np.ones((n, n)))
        errs.append(np.abs(curl_diagnostic(sm)[1:-1, 1:-1]).max())
    assert errs[0] > errs[1] > errs[2]


# ---------------------------------------------------------------------------
# Fixtures

def test_flat_map_is_empty():
    sm = gen_flat_map(8)
    assert not sm.mask.any()
    assert np.all(sm.x == 0.0) and np.all(sm.y == 0.0)


def test_sphere_map_center_and_rim():
    sm = gen_sphere_map(65)
    assert sm.x[32, 32] == 0.0 and sm.y[32, 32] == 0.0
    assert sm.d[32, 32] == 1.0  # unit chord at the apex
    assert sm.d[0, 0] == 0.0    # corners lie outside the silhouette
    # halfway out along +u: x = 0.5, y = 0, d = sqrt(3)/2
    assert sm.x[32, 48] == pytest.approx(0.5, abs=1e-12)
    assert sm.d[32, 48] == pytest.approx(math.sqrt(0.75), abs=1e-12)


def test_sphere_map_coverage_near_disc_area():
    sm = gen_sphere_map(256)
    coverage = sm.mask.mean()
    assert abs(coverage - math.pi / 4.0) < 0.02


def test_sphere_map_radius_and_thickness_scale():
    small = gen_sphere_map(65, radius=0.5)
    assert small.mask.mean() < 0.25
    thin = gen_sphere_map(65, thickness_scale=0.25)
    assert thin.d[32, 32] == pytest.approx(0.25, abs=1e-12)


def test_sphere_map_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_sphere_map(1)
    with pytest.raises(ValueError):
        gen_sphere_map(16, thickness_scale=0.0)


def test_rotation_map_axis_conventions():
    sm = gen_rotation_map(65)
    # (u, v) = (1/2, 1): row 64, column 32 -> field (1, 0)
    assert (sm.x[64, 32], sm.y[64, 32]) == (1.0, 0.0)
    # (u, v) = (0, 1/2): row 32, column 0 -> field (0, 1)
    assert (sm.x[32, 0], sm.y[32, 0]) == (0.0, 1.0)
    assert np.all(sm.d == 1.0)


# ---------------------------------------------------------------------------
# Resize and stats

def test_resize_shape_map_identity():
    sm = gen_sphere_map(16)
    assert resize_shape_map(sm, 16, 16) is sm


def test_resize_shape_map_keeps_ranges():
    sm = gen_rotation_map(64)
    out = resize_shape_map(sm, 17, 23)
    assert out.width == 17 and out.height == 23
    assert out.x.min() >= -1.0 and out.x.max() <= 1.0
    assert np.all(out.d >= 0.0) and np.all(out.d <= 1.0)


def test_stats_fields():
    sm = gen_sphere_map(32)
    info = stats(sm)
    assert info["width"] == 32 and info["height"] == 32
    assert 0.0 < info["coverage"] < 1.0
    assert info["x"]["min"] < 0.0 < info["x"]["max"]
    assert info["d"]["max"] <= 1.0
    assert info["maxAbsCurl"] >= 0.0


def test_stats_of_rotation_map_reports_curl():
    info = stats(gen_rotation_map(33))
    assert info["maxAbsCurl"] == pytest.approx(4.0, abs=1e-9)
