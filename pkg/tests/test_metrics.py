import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from renderiqa.image import DimensionMismatchError, ImageError
from renderiqa.metrics import Flag, SsimParams, mse, psnr, ssim

import oracles

GLOBAL = SsimParams()
WINDOWED = SsimParams(mode="windowed")

images16 = arrays(np.float64, (16, 16), elements=st.floats(0, 255))


def test_mse_examples():
    z = np.zeros((2, 2))
    assert mse(z, z) == 0.0
    assert mse(z, np.ones((2, 2))) == 1.0
    assert mse(z, [[1, 2], [3, 4]]) == 7.5
    with pytest.raises(DimensionMismatchError):
        mse(z, np.zeros((2, 3)))


def test_psnr_examples():
    z = np.zeros((4, 4))
    assert psnr(z, z) is Flag.IDENTICAL
    assert psnr(z, np.ones((4, 4))) == pytest.approx(20 * math.log10(255), abs=1e-12)
    assert psnr(z, np.ones((4, 4))) == pytest.approx(48.1308, abs=1e-4)
    assert psnr(z, np.full((4, 4), 255.0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        psnr(z, z, max_p=0)


def test_mse_matches_oracle(rng):
    for _ in range(5):
        a, b = rng.uniform(0, 255, (2, 20, 24))
        assert mse(a, b) == pytest.approx(oracles.mse(a.tolist(), b.tolist()), rel=1e-12)
        assert psnr(a, b) == pytest.approx(oracles.psnr(a.tolist(), b.tolist()), abs=1e-9)


@given(images16, images16)
def test_mse_symmetric(a, b):
    assert mse(a, b) == mse(b, a)


@given(arrays(np.float64, (8, 8), elements=st.floats(0, 100)),
       arrays(np.float64, (8, 8), elements=st.floats(0, 100)),
       st.floats(0, 155))
def test_mse_shift_invariant(a, b, c):
    assert mse(a + c, b + c) == pytest.approx(mse(a, b), rel=1e-9, abs=1e-9)


def test_psnr_decreases_with_mse():
    z = np.zeros((4, 4))
    values = [psnr(z, np.full((4, 4), d)) for d in (0.5, 1, 2, 10, 100)]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("params", [GLOBAL, WINDOWED], ids=["global", "windowed"])
def test_ssim_identity_and_symmetry(rng, params):
    x, y = rng.uniform(0, 255, (2, 24, 20))
    assert ssim(x, x, params).ssim == 1.0
    assert ssim(x, y, params).ssim == pytest.approx(ssim(y, x, params).ssim, abs=1e-12)


def test_ssim_constant_images():
    res = ssim(np.zeros((8, 8)), np.full((8, 8), 255.0))
    c1 = (0.01 * 255) ** 2
    assert res.contrast == 1.0 and res.structure == 1.0
    assert res.luminance == pytest.approx(c1 / (255 ** 2 + c1), abs=1e-15)
    assert res.ssim == pytest.approx(9.999e-5, abs=1e-8)


@given(images16, images16)
@settings(max_examples=40, deadline=None)
def test_ssim_ranges(x, y):
    for p in (GLOBAL, WINDOWED):
        r = ssim(x, y, p)
        assert -1.0 <= r.ssim <= 1.0
        assert 0.0 < r.luminance <= 1.0
        assert 0.0 < r.contrast <= 1.0
    g = ssim(x, y, GLOBAL)
    assert g.ssim == pytest.approx(g.luminance * g.contrast * g.structure, abs=1e-12)


def test_windowed_matches_oracle(rng):
    x = rng.uniform(0, 255, (14, 13))
    y = np.clip(x + rng.normal(0, 20, x.shape), 0, 255)
    expected = oracles.ssim_windowed(x.tolist(), y.tolist())
    assert ssim(x, y, WINDOWED).ssim == pytest.approx(expected, abs=1e-9)


def test_windowed_needs_room():
    with pytest.raises(ImageError):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)), WINDOWED)


def test_ssim_params_validation():
    with pytest.raises(ValueError):
        SsimParams(k1=0)
    with pytest.raises(ValueError):
        SsimParams(mode="fancy")
    with pytest.raises(ValueError):
        SsimParams(window_size=4)
    p = SsimParams()
    assert p.c3 == p.c2 / 2
