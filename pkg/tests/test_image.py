import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from renderiqa.image import (
    DimensionMismatchError,
    ImageError,
    ImageFormatError,
    Kernel,
    as_gray,
    convolve_same,
    downsample2x,
    gaussian_kernel,
    load_image,
    local_moments,
    save_image,
    to_grayscale,
    validate_pair,
)


def test_load_pgm_bytes(tmp_path):
    p = tmp_path / "tiny.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    img = load_image(p)
    assert img.shape == (2, 2)
    assert img.tolist() == [[0.0, 255.0], [128.0, 64.0]]


def test_load_rgb_png_uses_luma(tmp_path):
    p = tmp_path / "px.png"
    Image.fromarray(np.array([[[10, 20, 30]]], dtype=np.uint8), mode="RGB").save(p)
    # 0.299*10 + 0.587*20 + 0.114*30 = 2.99 + 11.74 + 3.42
    assert load_image(p)[0, 0] == pytest.approx(18.15, abs=1e-12)


def test_load_truncated_png(tmp_path):
    good = tmp_path / "good.png"
    Image.fromarray(np.zeros((32, 32), dtype=np.uint8)).save(good)
    bad = tmp_path / "bad.png"
    bad.write_bytes(good.read_bytes()[:40])
    with pytest.raises(ImageFormatError) as err:
        load_image(bad)
    assert "bad.png" in str(err.value)


def test_load_rejects_16bit(tmp_path):
    p = tmp_path / "deep.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(p)
    with pytest.raises(ImageFormatError, match="mode"):
        load_image(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(ImageFormatError, match="nope.png"):
        load_image(tmp_path / "nope.png")


def test_save_roundtrip(tmp_path):
    img = as_gray(np.arange(12, dtype=float).reshape(3, 4) * 20)
    for name in ("a.png", "a.pgm"):
        save_image(img, tmp_path / name)
        np.testing.assert_array_equal(load_image(tmp_path / name), img)


@pytest.mark.parametrize("rgb, expected", [((255, 255, 255), 255.0), ((0, 0, 0), 0.0), ((100, 150, 200), 140.75)])
def test_to_grayscale(rgb, expected):
    assert to_grayscale(*rgb) == pytest.approx(expected, abs=1e-12)


@given(st.floats(0, 255))
def test_grayscale_of_gray_is_identity(c):
    assert to_grayscale(c, c, c) == pytest.approx(c, abs=1e-12)


def test_as_gray_rejects_bad_input():
    with pytest.raises(ImageError):
        as_gray(np.zeros((2, 2, 3)))
    with pytest.raises(ImageError):
        as_gray(np.zeros((0, 3)))
    with pytest.raises(ImageError):
        as_gray([[1.0, float("nan")]])


def test_gaussian_kernel_values():
    assert gaussian_kernel(1, 0.3).weights.tolist() == [[1.0]]
    assert np.allclose(gaussian_kernel(3, 1e6).weights, 1 / 9, atol=1e-12)
    # centre 1, four edge taps exp(-1/2), four corner taps exp(-1)
    expected = 1.0 / (1.0 + 4 * math.exp(-0.5) + 4 * math.exp(-1.0))
    assert gaussian_kernel(3, 1.0).weights[1, 1] == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.204180, abs=1e-6)


@given(st.sampled_from([1, 3, 5, 7, 11]), st.floats(0.1, 20))
def test_gaussian_kernel_symmetry_and_normalization(size, sigma):
    w = gaussian_kernel(size, sigma).weights
    assert abs(w.sum() - 1.0) <= 1e-12
    np.testing.assert_array_equal(w, w[::-1, :])
    np.testing.assert_array_equal(w, w[:, ::-1])
    np.testing.assert_array_equal(w, w.T)


@pytest.mark.parametrize("size, sigma", [(2, 1.0), (0, 1.0), (3, 0.0), (3, -1.0)])
def test_gaussian_kernel_errors(size, sigma):
    with pytest.raises(ImageError):
        gaussian_kernel(size, sigma)


def test_kernel_must_be_normalized():
    with pytest.raises(ImageError):
        Kernel(np.ones((3, 3)))


def test_convolve_identity(rng):
    img = rng.uniform(0, 255, (9, 13))
    np.testing.assert_array_equal(convolve_same(img, gaussian_kernel(1, 1.0)), img)


@given(st.floats(0, 255), st.sampled_from([3, 5, 7]), st.floats(0.3, 5))
@settings(max_examples=30)
def test_convolve_constant(c, size, sigma):
    img = np.full((8, 9), c)
    out = convolve_same(img, gaussian_kernel(size, sigma))
    assert np.max(np.abs(out - c)) <= 1e-12 * max(1.0, c)


def test_convolve_hand_value():
    img = np.array([[0, 0, 0], [0, 9, 0], [0, 0, 0]], dtype=float)
    uniform = Kernel(np.full((3, 3), 1 / 9))
    out = convolve_same(img, uniform)
    assert out.shape == (3, 3)
    assert out[1, 1] == pytest.approx(1.0, abs=1e-12)


def test_convolve_kernel_too_large():
    with pytest.raises(ImageError):
        convolve_same(np.zeros((4, 10)), gaussian_kernel(5, 1.0))


def test_local_moments_flat_is_exact():
    img = np.full((10, 10), 173.0)
    mean, var = local_moments(img, gaussian_kernel(7, 7 / 6))
    assert np.all(mean == 173.0)
    assert np.all(var == 0.0)


def test_downsample():
    np.testing.assert_array_equal(downsample2x([[0, 2], [4, 6]]), [[3.0]])
    np.testing.assert_array_equal(downsample2x(np.full((4, 4), 7.0)), np.full((2, 2), 7.0))
    img = np.arange(9, dtype=float).reshape(3, 3)
    np.testing.assert_array_equal(downsample2x(img), [[(0 + 1 + 3 + 4) / 4]])
    with pytest.raises(ImageError):
        downsample2x(np.zeros((1, 5)))


@given(st.integers(1, 6), st.floats(0, 255))
def test_downsample_constant(n, c):
    out = downsample2x(np.full((2 * n, 2 * n), c))
    assert out.shape == (n, n)
    assert np.all(out == c)


def test_validate_pair():
    validate_pair(np.zeros((64, 64)), np.zeros((64, 64)))
    validate_pair(np.zeros((1, 1)), np.zeros((1, 1)))
    with pytest.raises(DimensionMismatchError) as err:
        validate_pair(np.zeros((64, 64)), np.zeros((63, 64)))
    assert "64x64" in str(err.value) and "64x63" in str(err.value)
