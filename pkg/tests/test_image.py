"""Padding geometry, adjointness, and PNG round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from prforge.image import (as_image, crop_support, default_support, load_png,
                           pad_to_grid, quantize_u8, save_png)


def test_pad_smallest_case():
    assert np.array_equal(pad_to_grid(np.array([[5.0]])), np.array([[5.0, 0.0], [0.0, 0.0]]))


def test_pad_preserves_sum():
    img = np.random.default_rng(0).uniform(0, 255, (7, 9))
    assert pad_to_grid(img).sum() == pytest.approx(img.sum(), rel=1e-15)


def test_crop_inverts_pad():
    img = np.random.default_rng(1).uniform(0, 255, (16, 16))
    assert np.array_equal(crop_support(pad_to_grid(img)), img)


def test_crop_zero_grid():
    assert not crop_support(np.zeros((8, 8))).any()


def test_crop_energy_monotone():
    grid = np.random.default_rng(2).normal(size=(10, 10))
    assert np.sum(crop_support(grid) ** 2) <= np.sum(grid**2)


def test_crop_rejects_odd_grids():
    with pytest.raises(ValueError):
        crop_support(np.zeros((5, 6)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31))
def test_pad_crop_adjoint(h, w, seed):
    # <pad(a), g> == <a, crop(g)>
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(h, w))
    g = rng.normal(size=(2 * h, 2 * w))
    lhs = float(np.sum(pad_to_grid(a) * g))
    rhs = float(np.sum(a * crop_support(g, h, w)))
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))


def test_default_support_shape():
    mask = default_support(3, 5)
    assert mask.shape == (6, 10)
    assert mask[:3, :5].all()
    assert mask.sum() == 15


def test_as_image_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_image(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        as_image(np.zeros(4))


def test_quantize_rounds_half_to_even():
    vals = np.array([[0.5, 1.5, 2.5, 254.5], [-3.0, 300.0, 127.4, 127.6]])
    out = quantize_u8(vals)
    assert out.tolist() == [[0, 2, 2, 254], [0, 255, 127, 128]]


def test_png_roundtrip_8bit(tmp_path):
    img = np.random.default_rng(3).integers(0, 256, (12, 17)).astype(float)
    p = tmp_path / "img.png"
    save_png(p, img)
    assert np.array_equal(load_png(p), img)


def test_png_16bit_rescales(tmp_path):
    data16 = (np.arange(64, dtype=np.uint16).reshape(8, 8) * 1021)
    p = tmp_path / "img16.png"
    im = Image.new("I;16", (8, 8))
    im.putdata([int(v) for v in data16.ravel()])
    im.save(p)
    got = load_png(p)
    assert got.max() <= 255.0
    assert np.allclose(got, data16.astype(float) / 257.0)


def test_png_rejects_color(tmp_path):
    p = tmp_path / "rgb.png"
    Image.new("RGB", (4, 4)).save(p)
    with pytest.raises(ValueError):
        load_png(p)
