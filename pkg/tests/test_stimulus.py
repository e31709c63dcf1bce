import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from spikesal.stimulus import (
    RGBImage,
    StimulusError,
    as_plane,
    grayscale,
    load_gray,
    load_image,
    resize,
    yellow_channel,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def _save_rgb(path, pixels):
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), "RGB").save(path)


class TestLoadImage:
    def test_scaling(self, tmp_path):
        p = tmp_path / "a.png"
        _save_rgb(p, [[[255, 0, 0], [128, 128, 128]]])
        img = load_image(p)
        assert (img.red[0, 0], img.green[0, 0], img.blue[0, 0]) == (1.0, 0.0, 0.0)
        for plane in img:
            assert plane[0, 1] == 128 / 255

    def test_jpeg_accepted(self, tmp_path):
        p = tmp_path / "a.jpg"
        Image.new("RGB", (4, 3), (10, 20, 30)).save(p)
        assert load_image(p).shape == (3, 4)

    def test_missing_file(self, tmp_path):
        with pytest.raises(StimulusError, match="unreadable file"):
            load_image(tmp_path / "nope.png")

    def test_unsupported_format(self, tmp_path):
        p = tmp_path / "a.bmp"
        Image.new("RGB", (4, 4)).save(p)
        with pytest.raises(StimulusError, match="unsupported format"):
            load_image(p)

    def test_garbage_file(self, tmp_path):
        p = tmp_path / "a.png"
        p.write_bytes(b"not an image")
        with pytest.raises(StimulusError, match="unreadable"):
            load_image(p)

    def test_load_gray(self, tmp_path):
        p = tmp_path / "g.png"
        Image.fromarray(np.array([[0, 255]], dtype=np.uint8), "L").save(p)
        np.testing.assert_array_equal(load_gray(p), [[0.0, 1.0]])


class TestResize:
    def test_identity_is_bit_identical(self, rng):
        plane = rng.random((64, 64))
        out = resize(plane, (64, 64))
        assert np.array_equal(out, plane)
        assert out is not plane

    @pytest.mark.parametrize("target", [(1, 1), (7, 13), (64, 64), (128, 32)])
    def test_constant_preserved(self, target):
        out = resize(np.full((10, 10), 0.4), target)
        assert out.shape == target
        np.testing.assert_allclose(out, 0.4, rtol=0, atol=1e-15)

    def test_two_by_two_upsample(self):
        # sample positions (j + 0.5) / 2 - 0.5 clamp to 0, 0.25, 0.75, 1
        out = resize(np.array([[0.0, 1.0], [0.0, 1.0]]), (4, 4))
        expected_row = [0.0, 0.25, 0.75, 1.0]
        np.testing.assert_allclose(out, [expected_row] * 4)
        assert np.all(np.diff(out, axis=1) > 0)

    def test_zero_target(self):
        with pytest.raises(StimulusError, match="zero target"):
            resize(np.zeros((4, 4)), (0, 4))

    @given(arrays(np.float64, (5, 6), elements=unit), st.integers(1, 20), st.integers(1, 20))
    @settings(max_examples=50, deadline=None)
    def test_range_kept_and_idempotent(self, plane, h, w):
        out = resize(plane, (h, w))
        assert out.min() >= plane.min() and out.max() <= plane.max()
        assert np.array_equal(resize(out, (h, w)), out)


class TestYellow:
    @pytest.mark.parametrize(
        "rgb, expected",
        [((1, 1, 0), 1.0), ((1, 0, 0), 0.0), ((1, 1, 1), 0.0), ((0, 0, 1), 0.0)],
    )
    def test_examples(self, rgb, expected):
        r, g, b = (np.full((2, 2), float(v)) for v in rgb)
        np.testing.assert_array_equal(yellow_channel(r, g, b), expected)

    def test_dimension_mismatch(self):
        with pytest.raises(StimulusError, match="dimension mismatch"):
            yellow_channel(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((3, 2)))

    @given(arrays(np.float64, (3, 4, 4), elements=unit))
    def test_bounds(self, rgb):
        y = yellow_channel(*rgb)
        assert np.all(y >= 0)
        assert np.all(y <= np.maximum(rgb[0], rgb[1]) + 1e-15)
        # with r, g >= 0 the formula reduces to min(r, g) - b
        np.testing.assert_allclose(y, np.maximum(np.minimum(rgb[0], rgb[1]) - rgb[2], 0), atol=1e-15)


class TestGrayscale:
    @pytest.mark.parametrize("rgb, expected", [((1, 1, 1), 1.0), ((0, 0, 0), 0.0), ((1, 0, 0), 0.299)])
    def test_examples(self, rgb, expected):
        r, g, b = (np.full((1, 1), float(v)) for v in rgb)
        assert grayscale(r, g, b)[0, 0] == pytest.approx(expected, abs=1e-15)

    @given(unit)
    def test_gray_pixel_fixed_point(self, v):
        p = np.full((2, 2), v)
        np.testing.assert_allclose(grayscale(p, p, p), v, atol=1e-15)

    def test_mismatch(self):
        with pytest.raises(StimulusError):
            grayscale(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_as_plane_rejects_bad_values():
    with pytest.raises(StimulusError, match="non-finite"):
        as_plane([[np.nan]])
    with pytest.raises(StimulusError, match=r"\[0, 1\]"):
        as_plane([[1.5]])
    assert as_plane([[0.5]]).dtype == np.float64


def test_rgb_from_gray_array():
    img = RGBImage.from_array(np.eye(3))
    assert img.shape == (3, 3)
    assert np.array_equal(img.red, img.blue)
