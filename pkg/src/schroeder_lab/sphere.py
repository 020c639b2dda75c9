"""Points on the Riemann sphere and the chordal metric.

A sphere point is an ordinary ``complex``; any value with an infinite
component stands for the point at infinity (canonically ``INF``).  All
neighborhood tests in the package use the chordal distance ``chi``,
normalized so that the sphere has diameter 1.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

INF = complex(math.inf, 0.0)


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


def normalize_point(z: complex) -> complex:
    """Collapse every representation of infinity (or NaN overflow) to INF."""
    if cmath.isinf(z) or cmath.isnan(z):
        return INF
    return complex(z)


def chi(z: complex, w: complex) -> float:
    """Chordal distance, range [0, 1].  chi(z, INF) = 1/hypot(1, |z|)."""
    zinf, winf = cmath.isinf(z), cmath.isinf(w)
    if zinf and winf:
        return 0.0
    if zinf:
        return 1.0 / math.hypot(1.0, abs(w))
    if winf:
        return 1.0 / math.hypot(1.0, abs(z))
    return abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


def chi_many(z, a: complex) -> np.ndarray:
    """Vectorized chordal distance from an array of points to a fixed point.

    Infinite or NaN entries of ``z`` are treated as the point at infinity.
    """
    z = np.asarray(z, dtype=np.complex128)
    az = np.hypot(z.real, z.imag)
    bad = ~np.isfinite(az)
    azc = np.where(bad, 0.0, az)
    scale = np.hypot(1.0, azc)
    if cmath.isinf(a):
        out = 1.0 / scale
        return np.where(bad, 0.0, out)
    zc = np.where(bad, 0.0, z)
    d = np.abs(zc - a)
    out = d / (scale * math.hypot(1.0, abs(a)))
    return np.where(bad, 1.0 / math.hypot(1.0, abs(a)), out)


def points_close(z: complex, w: complex, tol: float) -> bool:
    return chi(z, w) < tol
