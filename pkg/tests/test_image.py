import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage

from lassim.image import (
    DecodeError,
    UnsupportedFormatError,
    decode_image,
    encode_image,
    resize_bilinear,
    sample_bilinear,
    to_luma,
)


def _png(arr, mode):
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def test_decode_gray_png():
    data = _png(np.array([[0, 255], [128, 64]], dtype=np.uint8), "L")
    img = decode_image(data)
    assert img.shape == (2, 2)
    assert img.dtype == np.float64
    assert img.ravel().tolist() == [0.0, 255.0, 128.0, 64.0]


def test_decode_rgb_ppm():
    data = b"P6\n1 1\n255\n" + bytes([10, 20, 30])
    img = decode_image(data)
    assert img.shape == (1, 1, 3)
    assert img.ravel().tolist() == [10.0, 20.0, 30.0]


def test_decode_pgm():
    data = b"P5\n2 1\n255\n" + bytes([7, 200])
    assert decode_image(data).tolist() == [[7.0, 200.0]]


def test_truncated_png_raises():
    data = _png(np.arange(64, dtype=np.uint8).reshape(8, 8), "L")
    with pytest.raises(DecodeError):
        decode_image(data[: len(data) // 2])


def test_garbage_raises():
    with pytest.raises(DecodeError):
        decode_image(b"definitely not an image")


def test_sixteen_bit_png_unsupported():
    arr = (np.arange(4, dtype=np.uint16) * 1000).reshape(2, 2)
    buf = io.BytesIO()
    PILImage.fromarray(arr).save(buf, format="PNG")
    with pytest.raises(UnsupportedFormatError):
        decode_image(buf.getvalue())


def test_alpha_unsupported():
    with pytest.raises(UnsupportedFormatError):
        decode_image(_png(np.zeros((2, 2, 4), dtype=np.uint8), "RGBA"))


@pytest.mark.parametrize("fmt", ["png", "ppm"])
@pytest.mark.parametrize("value,expected", [(128.0, 128.0), (127.4, 127.0), (300.0, 255.0), (-3.0, 0.0), (2.5, 2.0), (3.5, 4.0)])
def test_encode_rounding_and_clamp(fmt, value, expected):
    out = decode_image(encode_image(np.array([[value]]), fmt))
    assert out.tolist() == [[expected]]


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6), st.sampled_from([1, 3])),
              elements=st.floats(0, 255)))
def test_round_trip_within_half(arr):
    arr = arr[..., 0] if arr.shape[2] == 1 else arr
    for fmt in ("png", "ppm"):
        back = decode_image(encode_image(arr, fmt))
        assert back.shape == arr.shape
        assert np.max(np.abs(back - arr)) <= 0.5


def test_luma_values():
    assert to_luma(np.full((1, 1, 3), 255.0))[0, 0] == pytest.approx(255.0, abs=1e-12)
    assert to_luma(np.array([[[255.0, 0.0, 0.0]]]))[0, 0] == pytest.approx(76.245, abs=1e-12)
    gray = np.array([[42.0]])
    out = to_luma(gray)
    assert out.tolist() == [[42.0]]
    assert out is not gray


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 4, 3), elements=st.floats(0, 255)))
def test_luma_stays_in_range(rgb):
    y = to_luma(rgb)
    assert y.min() >= -1e-9 and y.max() <= 255 + 1e-9


def test_resize_identity_bitwise():
    img = np.random.default_rng(0).uniform(0, 255, (4, 4))
    assert np.array_equal(resize_bilinear(img, 4, 4), img)


@pytest.mark.parametrize("size", [(1, 1), (7, 3), (13, 20)])
def test_resize_constant(size):
    img = np.full((5, 6), 93.25)
    out = resize_bilinear(img, *size)
    assert out.shape == (size[1], size[0])
    assert np.all(out == 93.25)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 255), st.integers(1, 9), st.integers(1, 9), st.integers(1, 9), st.integers(1, 9))
def test_resize_constant_property(c, w, h, new_w, new_h):
    out = resize_bilinear(np.full((h, w), c), new_w, new_h)
    assert np.all(out == c)


def test_resize_two_to_three():
    out = resize_bilinear(np.array([[0.0, 255.0]]), 3, 1)
    # Pixel-centre mapping: x_src = (x + 0.5) * 2/3 - 0.5 -> -1/6 (clamped), 1/2, 7/6 (clamped).
    assert out.tolist() == [[0.0, 127.5, 255.0]]
    assert np.all(np.diff(out[0]) >= 0)


def test_sample_bilinear_integer_coords_exact():
    img = np.random.default_rng(1).uniform(0, 255, (5, 7))
    yy, xx = np.meshgrid(np.arange(5.0), np.arange(7.0), indexing="ij")
    assert np.array_equal(sample_bilinear(img, yy, xx), img)


def test_sample_bilinear_midpoint():
    img = np.array([[0.0, 10.0], [20.0, 30.0]])
    assert sample_bilinear(img, np.array([0.5]), np.array([0.5]))[0] == 15.0
    # Outside the image clamps to the edge.
    assert sample_bilinear(img, np.array([-3.0]), np.array([9.0]))[0] == 10.0
