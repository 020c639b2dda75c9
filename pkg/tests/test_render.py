"""Image buffers and domain coloring."""

import numpy as np
import pytest

from schroeder_lab.dynamics import RationalMap
from schroeder_lab.render import ImageBuffer, domain_coloring, labels_image, write_image
from schroeder_lab.schroeder import schroeder_coefficients


@pytest.fixture(scope="module")
def exp_series():
    return schroeder_coefficients(RationalMap([0, 0, 1]), 1.0, order=48)


def test_buffer_invariants():
    with pytest.raises(ValueError):
        ImageBuffer(width=2, height=2, channels=3, pixels=b"xx", transform=(1, 0, 1, 0))
    with pytest.raises(ValueError):
        ImageBuffer(width=1, height=1, channels=1, pixels=b"x", transform=(0, 0, 1, 0))


def test_exp_hue_bands(exp_series):
    # arg e^w = Im w: hue varies along the imaginary axis, constant along
    # the real axis
    img = domain_coloring(exp_series, R=2.0, n=64)
    data = np.frombuffer(img.pixels, dtype=np.uint8).reshape(64, 64, 3).astype(int)
    mid = 32
    row_spread = np.mean(np.abs(np.diff(data[mid, 8:-8, :], axis=0)))
    col_spread = np.mean(np.abs(np.diff(data[8:-8, mid, :], axis=0)))
    assert col_spread > 2 * row_spread


def test_center_pixel_near_base_point(exp_series):
    # h(w) ~ z0 + w near 0: the center of a small box renders like z0 = 1
    img = domain_coloring(exp_series, R=0.05, n=33)
    data = np.frombuffer(img.pixels, dtype=np.uint8).reshape(33, 33, 3)
    center = data[16, 16]
    # hue of arg(1) = 0 -> red-dominant pixel
    assert center[0] > center[2]


def test_constant_field_uniform():
    from schroeder_lab.render import field_image
    img = field_image(np.full((16, 16), 3.0), 0.0, 6.0)
    vals = set(img.pixels)
    assert len(vals) == 1


def test_labels_image_mod256(tmp_path):
    labels = np.arange(300).reshape(10, 30)
    img = labels_image(labels, R=1.0)
    arr = np.frombuffer(img.pixels, dtype=np.uint8).reshape(10, 30)
    assert arr[0, 4] == (labels[::-1][0, 4] % 256)
    p = tmp_path / "m.pgm"
    write_image(img, str(p))
    assert p.read_bytes().startswith(b"P5\n30 10\n255\n")
