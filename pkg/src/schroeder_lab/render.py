"""Image output: domain coloring of the linearizer, component-mask
snapshots, escape-time heatmaps.  Formats are binary PPM (P6) for color and
PGM (P5) for masks; both are written with fixed headers so identical
configurations produce identical bytes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schroeder import SchroederSeries
from .tracts import grid_points


@dataclass(frozen=True)
class ImageBuffer:
    width: int
    height: int
    channels: int
    pixels: bytes
    # world-to-pixel affine (x_scale, x_off, y_scale, y_off)
    transform: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * self.channels:
            raise ValueError("pixel payload does not match the declared shape")
        if self.transform[0] == 0 or self.transform[2] == 0:
            raise ValueError("world-to-pixel transform is not invertible")


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def domain_coloring(series: SchroederSeries, R: float, n: int, threads: int = 1) -> ImageBuffer:
    """Hue follows arg h, lightness compresses log(1 + |h|); points at
    infinity are white."""
    W = grid_points(R, n)
    H = series.evaluate_many(W, threads=threads)
    finite = np.isfinite(H.real) & np.isfinite(H.imag)
    Hf = np.where(finite, H, 0.0)
    hue = np.mod(np.angle(Hf) / (2.0 * np.pi), 1.0)
    mag = np.log1p(np.abs(Hf))
    val = mag / (1.0 + mag)
    sat = np.full_like(val, 0.9)
    rgb = _hsv_to_rgb(hue, sat, 0.25 + 0.75 * val)
    rgb[~finite] = 1.0
    data = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    # image rows run top-down; grid rows run bottom-up in imaginary part
    data = data[::-1]
    step = 2.0 * R / n
    return ImageBuffer(
        width=n, height=n, channels=3, pixels=data.tobytes(),
        transform=(1.0 / step, R / step - 0.5, -1.0 / step, R / step - 0.5),
    )


def labels_image(labels: np.ndarray, R: float) -> ImageBuffer:
    """Component ids mod 256 as one gray byte each (background stays 0)."""
    n = labels.shape[0]
    data = (labels % 256).astype(np.uint8)[::-1]
    step = 2.0 * R / n
    return ImageBuffer(
        width=labels.shape[1], height=labels.shape[0], channels=1,
        pixels=data.tobytes(),
        transform=(1.0 / step, R / step - 0.5, -1.0 / step, R / step - 0.5),
    )


def field_image(field: np.ndarray, lo: float, hi: float,
                transform=(1.0, 0.0, 1.0, 0.0)) -> ImageBuffer:
    """Scalar field to grayscale with a fixed affine range map."""
    span = hi - lo if hi > lo else 1.0
    data = np.clip((field - lo) / span, 0.0, 1.0)
    data = np.rint(data * 255.0).astype(np.uint8)[::-1]
    return ImageBuffer(width=field.shape[1], height=field.shape[0], channels=1,
                       pixels=data.tobytes(), transform=transform)


def write_image(img: ImageBuffer, path: str) -> None:
    magic = b"P6" if img.channels == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.pixels)
