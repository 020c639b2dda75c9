"""Simultaneous all-roots solver for complex polynomials (Aberth-Ehrlich).

Coefficients are ascending (c[0] + c[1] z + ...).  All degree roots are
refined together; multiple roots come back as clusters, which callers
merge with ``cluster_points``.
"""

from __future__ import annotations

import math

import numpy as np


class RootFindingError(RuntimeError):
    """Raised when the simultaneous iteration fails to converge.

    Carries the last iterate and per-root backward-error residuals for
    diagnosis.
    """

    def __init__(self, message: str, roots: np.ndarray, residuals: np.ndarray):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


def _trim(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128).ravel()
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=np.complex128)
    nz = np.nonzero(np.abs(c) > scale * 1e-300)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=np.complex128)


def _horner_pair(c: np.ndarray, z: np.ndarray):
    p = np.full_like(z, c[-1])
    dp = np.zeros_like(z)
    for a in c[-2::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _reconstruction_error(c: np.ndarray, z: np.ndarray) -> float:
    """Coefficient-space residual: rebuild the monic polynomial from the
    roots and compare.  Meaningful for multiple roots, where the pointwise
    backward error is uninformative."""
    recon = np.polynomial.polynomial.polyfromroots(z)
    scale = max(1.0, float(np.max(np.abs(c))))
    return float(np.max(np.abs(recon - c))) / scale


def all_roots(coeffs, tol: float = 1e-13, max_iter: int = 200) -> np.ndarray:
    """All complex roots of the polynomial, degree of them, unsorted clusters
    for multiple roots.  Raises RootFindingError when the backward error of
    some root stays above 1e-8 after max_iter sweeps."""
    c = _trim(coeffs)
    n = len(c) - 1
    if n <= 0:
        return np.zeros(0, dtype=np.complex128)
    if n == 1:
        return np.array([-c[0] / c[1]], dtype=np.complex128)
    c = c / c[-1]

    # initial guesses on a Cauchy-bound circle, angles offset so no guess
    # sits on a symmetry axis of the root set
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    angles = 2.0 * math.pi * (np.arange(n) + 0.35) / n + 0.5 / n
    z = radius * np.exp(1j * angles)

    block = 256
    for _ in range(max_iter):
        p, dp = _horner_pair(c, z)
        w = p / np.where(dp == 0, 1e-300, dp)
        s = np.empty_like(z)
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            diff = z[lo:hi, None] - z[None, :]
            np.fill_diagonal(diff[:, lo:hi], np.inf)
            s[lo:hi] = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        corr = w / np.where(denom == 0, 1e-300, denom)
        z = z - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(z))) < tol:
            break

    # Newton polish; skip roots where the derivative vanished (clusters)
    for _ in range(3):
        p, dp = _horner_pair(c, z)
        step = p / np.where(np.abs(dp) < 1e-280, 1e-280, dp)
        step = np.where(np.abs(step) < 1.0, step, 0.0)
        z = z - step

    res = _reconstruction_error(c, z)
    if res > 1e-7:
        p, _ = _horner_pair(c, z)
        raise RootFindingError(
            f"all-roots iteration did not converge (coefficient residual {res:.3e})",
            z,
            np.abs(p),
        )
    return z


def cluster_points(points, tol: float) -> list[tuple[complex, int]]:
    """Greedy clustering of near-coincident roots; returns (center, count)."""
    out: list[tuple[complex, int]] = []
    for z in sorted(np.asarray(points, dtype=np.complex128), key=lambda x: (x.real, x.imag)):
        for i, (center, count) in enumerate(out):
            if abs(z - center) <= tol * (1.0 + abs(center)):
                out[i] = ((center * count + z) / (count + 1), count + 1)
                break
        else:
            out.append((complex(z), 1))
    return out
