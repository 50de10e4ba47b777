import numpy as np
import pytest
from PIL import Image

from morphkit.errors import FormatError
from morphkit.raster import (
    Raster,
    blend,
    load_image,
    sample_bilinear,
    sample_bilinear_many,
    save_image,
)


def checker(h=8, w=8):
    rng = np.random.default_rng(42)
    return Raster(rng.integers(0, 256, size=(h, w, 3)).astype(np.float64) / 255.0)


def test_raster_validation():
    with pytest.raises(ValueError):
        Raster(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        Raster(np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        Raster(np.zeros((0, 4, 3)))
    with pytest.raises(ValueError):
        Raster(np.full((2, 2, 3), np.nan))


def test_raster_clamps_and_freezes():
    r = Raster(np.array([[[1.5, -0.5, 0.25]]]))
    assert r.data[0, 0].tolist() == [1.0, 0.0, 0.25]
    with pytest.raises(ValueError):
        r.data[0, 0, 0] = 0.5


def test_quantized_round_half_away():
    r = Raster(np.array([[[0.0, 1.0, 127.5 / 255.0]]]))
    assert r.quantized()[0, 0].tolist() == [0, 255, 128]
    # Every exact 8-bit level must survive the v/255 -> *255 round trip.
    levels = np.arange(256, dtype=np.float64) / 255.0
    r = Raster(np.stack([levels] * 3, axis=-1)[None, :, :])
    assert np.array_equal(r.quantized()[0, :, 0], np.arange(256, dtype=np.uint8))


def test_png_round_trip(tmp_path):
    r = checker()
    path = tmp_path / "img.png"
    save_image(r, path)
    back = load_image(path)
    assert np.array_equal(back.quantized(), r.quantized())
    assert np.array_equal(back.data, r.data)


def test_jpeg_loads(tmp_path):
    path = tmp_path / "img.jpg"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(path, format="JPEG")
    r = load_image(path)
    assert (r.height, r.width) == (4, 4)


def test_unsupported_format_rejected(tmp_path):
    path = tmp_path / "img.bmp"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(path, format="BMP")
    with pytest.raises(FormatError, match="unsupported"):
        load_image(path)


def test_missing_and_corrupt_files(tmp_path):
    with pytest.raises(FormatError, match="not found"):
        load_image(tmp_path / "nope.png")
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"this is not a png")
    with pytest.raises(FormatError, match="unreadable"):
        load_image(bad)


def test_sample_bilinear_exact_and_interpolated():
    data = np.zeros((2, 2, 3))
    data[0, 0] = 0.0
    data[0, 1] = 1.0
    data[1, 0] = 0.0
    data[1, 1] = 1.0
    r = Raster(data)
    assert sample_bilinear(r, 0.0, 0.0).tolist() == [0.0, 0.0, 0.0]
    assert sample_bilinear(r, 1.0, 0.0).tolist() == [1.0, 1.0, 1.0]
    assert sample_bilinear(r, 0.5, 0.5).tolist() == [0.5, 0.5, 0.5]
    # Clamping: coordinates outside the frame behave like the edge.
    assert sample_bilinear(r, -3.0, 0.0).tolist() == [0.0, 0.0, 0.0]
    assert sample_bilinear(r, 5.0, 5.0).tolist() == [1.0, 1.0, 1.0]


def test_sample_bilinear_many_matches_scalar():
    r = checker(6, 9)
    rng = np.random.default_rng(1)
    xs = rng.uniform(-2, 11, size=40)
    ys = rng.uniform(-2, 8, size=40)
    got = sample_bilinear_many(r, xs, ys)
    for i in range(len(xs)):
        assert np.array_equal(got[i], sample_bilinear(r, xs[i], ys[i]))


def test_blend_endpoints_and_midpoint():
    a, b = checker(4, 4), Raster(np.ones((4, 4, 3)) * 0.25)
    assert np.array_equal(blend(a, b, 1.0).data, a.data)
    assert np.array_equal(blend(a, b, 0.0).data, b.data)
    mid = blend(a, b, 0.5)
    assert np.array_equal(mid.data, 0.5 * a.data + 0.5 * b.data)


def test_blend_swap_symmetry_bit_exact():
    a, b = checker(5, 7), checker(5, 7)
    rng = np.random.default_rng(8)
    for alpha in rng.uniform(0, 1, size=50):
        lhs = blend(a, b, float(alpha)).data
        rhs = blend(b, a, 1.0 - float(alpha)).data
        assert np.array_equal(lhs, rhs)


def test_blend_shape_mismatch():
    with pytest.raises(ValueError):
        blend(checker(4, 4), checker(4, 5), 0.5)
