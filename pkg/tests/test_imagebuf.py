"""Unit tests for raster storage, sRGB transfer, sampling and pyramids."""

import numpy as np
import pytest

from shapecomp.imagebuf import (
    BlurPyramid,
    EdgeMode,
    RasterImage,
    build_pyramid,
    from_bytes_u8,
    linear_to_srgb,
    png_bytes,
    read_png,
    resize,
    sample_bilinear,
    sample_bilinear_px,
    sample_blurred,
    sample_blurred_px,
    srgb_to_linear,
    to_bytes_u8,
    write_png,
)


def _random_image(rng, w, h):
    return RasterImage(rng.random((h, w, 4)))


# ---------------------------------------------------------------------------
# RasterImage container

def test_raster_image_accepts_valid_pixels():
    img = RasterImage(np.zeros((2, 3, 4)))
    assert img.width == 3 and img.height == 2


def test_raster_image_rejects_bad_shapes():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((2, 3, 3)))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((0, 3, 4)))


def test_raster_image_rejects_bad_values():
    with pytest.raises(ValueError):
        RasterImage(np.full((1, 1, 4), 1.5))
    with pytest.raises(ValueError):
        RasterImage(np.full((1, 1, 4), -0.1))
    with pytest.raises(ValueError):
        RasterImage(np.full((1, 1, 4), np.nan))


def test_raster_image_is_immutable():
    img = RasterImage(np.zeros((1, 1, 4)))
    assert not img.pixels.flags.writeable
    with pytest.raises(ValueError):
        img.pixels[0, 0, 0] = 1.0


def test_full_constant_image():
    img = RasterImage.full(3, 2, (0.1, 0.2, 0.3, 1.0))
    assert np.allclose(img.pixels[..., 0], 0.1)
    assert np.allclose(img.pixels[..., 3], 1.0)


# ---------------------------------------------------------------------------
# sRGB transfer

def test_srgb_decode_midpoint_oracle():
    # ((0.5 + 0.055) / 1.055) ** 2.4, evaluated independently
    assert srgb_to_linear(0.5) == pytest.approx(0.21404114048223255, abs=1e-15)


def test_srgb_linear_segment():
    # below the knee the transfer is a pure 1/12.92 scale
    assert srgb_to_linear(0.04045) == pytest.approx(0.04045 / 12.92, abs=1e-15)
    assert linear_to_srgb(0.0031308) == pytest.approx(0.0031308 * 12.92, abs=1e-15)


def test_srgb_transfer_continuity_at_knee():
    lo = srgb_to_linear(0.04045 - 1e-9)
    hi = srgb_to_linear(0.04045 + 1e-9)
    assert abs(hi - lo) < 1e-7


def test_srgb_roundtrip_all_bytes_exact():
    b = np.arange(256)
    enc = np.round(linear_to_srgb(srgb_to_linear(b / 255.0)) * 255.0)
    assert np.array_equal(enc, b)


def test_srgb_endpoints_and_monotonicity():
    assert srgb_to_linear(0.0) == 0.0
    assert srgb_to_linear(1.0) == pytest.approx(1.0, abs=1e-15)
    v = np.linspace(0.0, 1.0, 1001)
    assert np.all(np.diff(srgb_to_linear(v)) > 0)
    assert np.all(np.diff(linear_to_srgb(v)) > 0)


def test_byte_codec_roundtrip_exact():
    rng = np.random.default_rng(11)
    raw = rng.integers(0, 256, (16, 16, 4), dtype=np.uint8)
    assert np.array_equal(to_bytes_u8(from_bytes_u8(raw)), raw)
    assert np.array_equal(to_bytes_u8(from_bytes_u8(raw, srgb=False), srgb=False), raw)


# ---------------------------------------------------------------------------
# Bilinear sampling

def _two_by_two():
    px = np.zeros((2, 2, 4))
    px[0, 0, 0] = 0.1
    px[0, 1, 0] = 0.3
    px[1, 0, 0] = 0.5
    px[1, 1, 0] = 0.9
    px[..., 3] = 1.0
    return RasterImage(px)


def test_sample_exact_at_texel_centers():
    rng = np.random.default_rng(3)
    img = _random_image(rng, 5, 4)
    for i in range(4):
        for j in range(5):
            u = j / 4.0
            v = i / 3.0
            got = sample_bilinear(img, u, v)
            assert np.array_equal(got, img.pixels[i, j])


def test_sample_midpoint_is_average():
    img = _two_by_two()
    got = sample_bilinear(img, 0.5, 0.5)
    assert got[0] == pytest.approx((0.1 + 0.3 + 0.5 + 0.9) / 4.0, abs=1e-15)


def test_sample_clamp_replicates_edges():
    img = _two_by_two()
    assert sample_bilinear(img, -3.0, 0.0)[0] == pytest.approx(0.1)
    assert sample_bilinear(img, 4.0, 1.0)[0] == pytest.approx(0.9)


def test_sample_wrap_tiles_unit_interval():
    rng = np.random.default_rng(4)
    img = _random_image(rng, 7, 7)
    a = sample_bilinear(img, 0.25, 0.6, EdgeMode.WRAP)
    b = sample_bilinear(img, 1.25, -0.4, EdgeMode.WRAP)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_sample_px_matches_uv():
    rng = np.random.default_rng(5)
    img = _random_image(rng, 9, 6)
    u, v = 0.37, 0.81
    a = sample_bilinear(img, u, v)
    b = sample_bilinear_px(img, u * 8, v * 5)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_sample_px_wrap_period_is_span():
    rng = np.random.default_rng(6)
    img = _random_image(rng, 5, 5)
    a = sample_bilinear_px(img, 1.3, 2.1, EdgeMode.WRAP)
    b = sample_bilinear_px(img, 1.3 + 4.0, 2.1 - 8.0, EdgeMode.WRAP)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_sample_single_texel_image():
    img = RasterImage.full(1, 1, (0.2, 0.4, 0.6, 1.0))
    got = sample_bilinear(img, 0.9, -2.0)
    np.testing.assert_allclose(got, [0.2, 0.4, 0.6, 1.0], atol=1e-15)


def test_sample_vectorized_grid():
    rng = np.random.default_rng(8)
    img = _random_image(rng, 6, 6)
    u = rng.random((10, 10))
    v = rng.random((10, 10))
    got = sample_bilinear(img, u, v)
    assert got.shape == (10, 10, 4)
    one = sample_bilinear(img, u[3, 4], v[3, 4])
    np.testing.assert_allclose(got[3, 4], one, atol=1e-15)


# ---------------------------------------------------------------------------
# Blur pyramid

def test_pyramid_level_zero_is_input_bit_exact():
    rng = np.random.default_rng(9)
    img = _random_image(rng, 16, 16)
    pyr = build_pyramid(img, 4)
    assert pyr.level_count == 4
    assert np.array_equal(pyr.levels[0].pixels, img.pixels)


def test_pyramid_rejects_empty():
    with pytest.raises(ValueError):
        build_pyramid(RasterImage.full(4, 4), 0)
    with pytest.raises(ValueError):
        BlurPyramid(())


def test_pyramid_levels_share_resolution():
    img = RasterImage.full(8, 5)
    pyr = build_pyramid(img, 3)
    for lv in pyr.levels:
        assert lv.width == 8 and lv.height == 5
    with pytest.raises(ValueError):
        BlurPyramid((RasterImage.full(2, 2), RasterImage.full(3, 3)))


def test_pyramid_blur_radius_doubles_per_level():
    # an impulse blurred to level k should carry variance 4**(k-1)
    size = 257
    px = np.zeros((size, size, 4))
    px[size // 2, size // 2, :] = 1.0
    pyr = build_pyramid(RasterImage(px), 6)
    coords = np.arange(size) - size // 2
    for k in range(1, 6):
        lv = pyr.levels[k].pixels[..., 0]
        row = lv.sum(axis=0)
        var = (row * coords**2).sum() / row.sum()
        assert var == pytest.approx(4.0 ** (k - 1), rel=0.02)


def test_pyramid_wrap_preserves_mean_exactly():
    rng = np.random.default_rng(10)
    img = _random_image(rng, 32, 32)
    pyr = build_pyramid(img, 5, EdgeMode.WRAP)
    for lv in pyr.levels:
        np.testing.assert_allclose(lv.pixels.mean(axis=(0, 1)),
                                   img.pixels.mean(axis=(0, 1)), atol=1e-12)


def test_pyramid_clamp_mean_stays_close_on_symmetric_input():
    g = np.linspace(0.0, 1.0, 64)
    px = np.zeros((64, 64, 4))
    px[..., 0] = g[None, :]
    px[..., 3] = 1.0
    img = RasterImage(px)
    pyr = build_pyramid(img, 6)
    for lv in pyr.levels:
        assert abs(lv.pixels[..., 0].mean() - img.pixels[..., 0].mean()) < 1e-3


def test_pyramid_smooths_monotonically():
    px = np.zeros((32, 32, 4))
    px[::2, ::2, 0] = 1.0
    px[1::2, 1::2, 0] = 1.0
    px[..., 3] = 1.0
    pyr = build_pyramid(RasterImage(px), 6)
    spreads = [lv.pixels[..., 0].max() - lv.pixels[..., 0].min()
               for lv in pyr.levels]
    assert all(b <= a + 1e-12 for a, b in zip(spreads, spreads[1:]))
    assert spreads[-1] < 0.1 * spreads[0]


def test_pyramid_keeps_channels_independent():
    px = np.zeros((16, 16, 4))
    px[..., 1] = 1.0  # constant green must stay constant
    px[8, 8, 0] = 1.0
    img = RasterImage(px)
    pyr = build_pyramid(img, 4)
    np.testing.assert_allclose(pyr.levels[3].pixels[..., 1], 1.0, atol=1e-12)
    assert pyr.levels[3].pixels[..., 0].max() < 1.0


def test_sample_blurred_integer_level_matches_direct():
    rng = np.random.default_rng(12)
    img = _random_image(rng, 12, 12)
    pyr = build_pyramid(img, 4)
    u, v = 0.3, 0.7
    for k in range(4):
        a = sample_blurred(pyr, u, v, float(k))
        b = sample_bilinear(pyr.levels[k], u, v)
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_sample_blurred_fractional_level_interpolates():
    rng = np.random.default_rng(13)
    img = _random_image(rng, 12, 12)
    pyr = build_pyramid(img, 3)
    u, v = 0.4, 0.2
    s1 = sample_blurred(pyr, u, v, 1.0)
    s2 = sample_blurred(pyr, u, v, 2.0)
    mid = sample_blurred(pyr, u, v, 1.25)
    np.testing.assert_allclose(mid, 0.75 * s1 + 0.25 * s2, atol=1e-12)


def test_sample_blurred_level_clamped_to_range():
    rng = np.random.default_rng(14)
    img = _random_image(rng, 8, 8)
    pyr = build_pyramid(img, 3)
    np.testing.assert_allclose(sample_blurred(pyr, 0.5, 0.5, 99.0),
                               sample_blurred(pyr, 0.5, 0.5, 2.0), atol=1e-15)
    np.testing.assert_allclose(sample_blurred(pyr, 0.5, 0.5, -3.0),
                               sample_blurred(pyr, 0.5, 0.5, 0.0), atol=1e-15)


def test_sample_blurred_per_sample_levels_match_scalar():
    rng = np.random.default_rng(15)
    img = _random_image(rng, 10, 10)
    pyr = build_pyramid(img, 4)
    u = rng.random(20)
    v = rng.random(20)
    levels = rng.random(20) * 3.0
    got = sample_blurred(pyr, u, v, levels)
    for i in range(20):
        np.testing.assert_allclose(got[i],
                                   sample_blurred(pyr, u[i], v[i], levels[i]),
                                   atol=1e-12)


def test_sample_blurred_px_matches_uv_variant():
    rng = np.random.default_rng(16)
    img = _random_image(rng, 10, 10)
    pyr = build_pyramid(img, 3)
    u = rng.random(8)
    v = rng.random(8)
    lv = rng.random(8) * 2.0
    a = sample_blurred(pyr, u, v, lv)
    b = sample_blurred_px(pyr, u * 9, v * 9, lv)
    np.testing.assert_allclose(a, b, atol=1e-12)


# ---------------------------------------------------------------------------
# Resize

def test_resize_identity_returns_same_image():
    img = RasterImage.full(6, 4, (0.5, 0.5, 0.5, 1.0))
    assert resize(img, 6, 4) is img


def test_resize_constant_stays_constant():
    img = RasterImage.full(16, 16, (0.3, 0.6, 0.9, 1.0))
    out = resize(img, 7, 5)
    assert out.width == 7 and out.height == 5
    np.testing.assert_allclose(out.pixels, img.pixels[:5, :7], atol=1e-12)


def test_resize_preserves_corner_values():
    rng = np.random.default_rng(17)
    img = _random_image(rng, 9, 9)
    out = resize(img, 5, 5)
    # texel-center mapping keeps the four corner texels fixed
    np.testing.assert_allclose(out.pixels[0, 0], img.pixels[0, 0], atol=1e-12)
    np.testing.assert_allclose(out.pixels[-1, -1], img.pixels[-1, -1], atol=1e-12)


def test_resize_rejects_degenerate_target():
    img = RasterImage.full(4, 4)
    with pytest.raises(ValueError):
        resize(img, 0, 4)


# ---------------------------------------------------------------------------
# PNG I/O

def test_png_roundtrip_preserves_bytes(tmp_path):
    rng = np.random.default_rng(18)
    raw = rng.integers(0, 256, (20, 30, 4), dtype=np.uint8)
    img = from_bytes_u8(raw)
    path = tmp_path / "img.png"
    write_png(path, img)
    back = read_png(str(path))
    assert np.array_equal(to_bytes_u8(back), raw)


def test_png_bytes_deterministic():
    rng = np.random.default_rng(19)
    img = _random_image(rng, 24, 24)
    assert png_bytes(img) == png_bytes(img)


def test_read_png_accepts_bytes_and_streams(tmp_path):
    rng = np.random.default_rng(20)
    img = _random_image(rng, 8, 8)
    data = png_bytes(img)
    a = read_png(data)
    path = tmp_path / "img.png"
    path.write_bytes(data)
    with open(path, "rb") as fh:
        b = read_png(fh)
    assert np.array_equal(a.pixels, b.pixels)


def test_read_png_rejects_garbage():
    with pytest.raises(Exception):
        read_png(b"definitely not a png")
