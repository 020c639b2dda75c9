"""Linearizing coordinate at a repelling periodic point.

Write g = f^p and let z0 be a repelling periodic point with multiplier
lam = (f^p)'(z0), |lam| > 1.  There is a unique meromorphic h on the plane
with h(0) = z0, h'(0) = 1 and g(h(w)) = h(lam * w).  Its Taylor
coefficients a_n satisfy a triangular recurrence: matching the w^n
coefficient of g(h(w)) = h(lam w) gives

    lam^n a_n = lam a_n + (polynomial in a_2..a_{n-1} and the Taylor
                coefficients of g at z0),

and lam^n - lam never vanishes because |lam| > 1.  Outside the disk where
the truncated series is trusted, h is evaluated through the functional
equation itself: h(w) = g^k(h(lam^-k w)) with lam^-k w pulled back into the
safe disk and g applied k times in sphere-normalized coordinates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .dynamics import CLASS_REPELLING, PeriodicPoint, RationalMap, classify_multiplier
from .sphere import INF, chi, is_inf, normalize_point

DEFAULT_ORDER = 64
RESIDUAL_TOL = 1e-10


class SafeRadiusError(RuntimeError):
    """No circle passed the residual test; carries the (r, residual) curve."""

    def __init__(self, message: str, curve: list[tuple[float, float]]):
        super().__init__(message)
        self.curve = curve


def taylor_shift(coeffs: np.ndarray, z0: complex, order: int) -> np.ndarray:
    """First `order`+1 Taylor coefficients of p(z0 + s) by repeated synthetic
    division; O(len * order), exact in the Horner sense."""
    work = np.asarray(coeffs, dtype=np.complex128).copy()
    n = len(work)
    out = np.zeros(order + 1, dtype=np.complex128)
    for j in range(min(order + 1, n)):
        # divide work by (z - z0); remainder is the next Taylor coefficient
        for i in range(n - 2 - j, -1, -1):
            work[i] = work[i] + z0 * work[i + 1]
        out[j] = work[0]
        work = work[1:].copy()
        if work.size == 0:
            break
    return out


def series_divide(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Power series quotient a/b to the given order; b[0] must be nonzero."""
    if abs(b[0]) == 0:
        raise ZeroDivisionError("series division by a series vanishing at 0")
    q = np.zeros(order + 1, dtype=np.complex128)
    for n in range(order + 1):
        acc = a[n] if n < len(a) else 0.0
        top = min(n, len(b) - 1)
        for j in range(1, top + 1):
            acc -= b[j] * q[n - j]
        q[n] = acc / b[0]
    return q


@dataclass(frozen=True)
class SchroederSeries:
    """Truncated linearizer: coefficients, trusted radius and the owning map.

    Immutable after construction; evaluation is re-entrant and safe for
    data-parallel grids.
    """

    fmap: RationalMap
    z0: complex
    period: int
    multiplier: complex
    coeffs: np.ndarray
    r_safe: float

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def depth_for(self, w: complex) -> int:
        aw = abs(w)
        if aw <= self.r_safe:
            return 0
        return max(0, math.ceil(math.log(aw / self.r_safe) / math.log(abs(self.multiplier))))

    # --- evaluation --------------------------------------------------------

    def evaluate(self, w: complex, depth: int | None = None) -> complex:
        """h(w) by pullback; `depth` forces the number of g-applications."""
        k = self.depth_for(w) if depth is None else depth
        u = w * self.multiplier ** (-k)
        z = complex(npoly.polyval(u, self.coeffs))
        return self.fmap.evaluate(z, k * self.period)

    def evaluate_many(self, w, threads: int = 1) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        shape = w.shape
        flat = np.ascontiguousarray(w.ravel())
        ph, pr, qh, qr = self.fmap.hom_coeffs
        out = kernels.run_chunked(
            lambda chunk: kernels.pullback_eval(
                self.coeffs, self.multiplier, self.r_safe, ph, pr, qh, qr,
                self.period, chunk,
            ),
            flat,
            threads=threads,
        )
        return out.reshape(shape)

    def log_abs_many(self, w, threads: int = 1) -> np.ndarray:
        """log|h(w)|, valid for polynomial maps (entire h) at any radius."""
        if not self.fmap.is_polynomial:
            raise ValueError(
                "log-modulus evaluation needs an entire linearizer; "
                "rational maps would require the spherical characteristic"
            )
        w = np.asarray(w, dtype=np.complex128)
        shape = w.shape
        flat = np.ascontiguousarray(w.ravel())
        fc = np.ascontiguousarray(self.fmap.num)
        out = kernels.run_chunked(
            lambda chunk: kernels.pullback_log_abs(
                self.coeffs, self.multiplier, self.r_safe, fc, self.period, chunk,
            ),
            flat,
            threads=threads,
        )
        return out.reshape(shape)

    def evaluate_with_error(self, w: complex) -> tuple[complex, float]:
        """Value plus a forward-error estimate: series truncation at the
        pullback point, amplified by the derivative magnitudes of the
        forward steps."""
        k = self.depth_for(w)
        u = w * self.multiplier ** (-k)
        z = complex(npoly.polyval(u, self.coeffs))
        tail = abs(self.coeffs[-1]) * abs(u) ** self.order
        if self.order >= 2:
            tail += abs(self.coeffs[-2]) * abs(u) ** (self.order - 1)
        err = tail
        val = z
        for _ in range(k * self.period):
            dval = self.fmap.chart_derivative(val)
            err *= max(abs(dval), 1e-16)
            val = self.fmap.evaluate(val, 1)
            if is_inf(val):
                break
        return val, float(err)

    def h_prime(self, w: complex) -> tuple[complex, complex]:
        """(h(w), h'(w)) by the chain rule through the pullback; the
        derivative is only meaningful while the forward orbit stays finite."""
        k = self.depth_for(w)
        u = w * self.multiplier ** (-k)
        dcoeffs = npoly.polyder(self.coeffs)
        z = complex(npoly.polyval(u, self.coeffs))
        dz = complex(npoly.polyval(u, dcoeffs)) * self.multiplier ** (-k)
        for _ in range(k * self.period):
            if is_inf(z):
                return z, INF
            dz *= self.fmap.chart_derivative(z)
            z = self.fmap.evaluate(z, 1)
        return z, dz

    def functional_residual(self, r: float, samples: int = 64) -> float:
        """max over |w|=r of |g(h_N(w)) - h_N(lam w)| / (1 + |h_N(lam w)|),
        both sides evaluated as plain truncated series."""
        ang = 2.0 * math.pi * (np.arange(samples) + 0.618) / samples
        w = r * np.exp(1j * ang)
        hw = npoly.polyval(w, self.coeffs)
        hlw = npoly.polyval(self.multiplier * w, self.coeffs)
        g = np.array([self.fmap.evaluate(z, self.period) for z in hw])
        num = np.abs(g - hlw)
        return float(np.max(num / (1.0 + np.abs(hlw))))

    # --- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "z0": [float(self.z0.real), float(self.z0.imag)],
            "lambda": [float(self.multiplier.real), float(self.multiplier.imag)],
            "p": int(self.period),
            "coeffs": [[float(a.real), float(a.imag)] for a in self.coeffs],
            "r_safe": float(self.r_safe),
        }

    @classmethod
    def from_json(cls, obj: dict, fmap: RationalMap) -> "SchroederSeries":
        return cls(
            fmap=fmap,
            z0=complex(*obj["z0"]),
            period=int(obj["p"]),
            multiplier=complex(*obj["lambda"]),
            coeffs=np.array([complex(re, im) for re, im in obj["coeffs"]]),
            r_safe=float(obj["r_safe"]),
        )


def _taylor_of_iterate(g: RationalMap, z0: complex, order: int) -> np.ndarray:
    num_t = taylor_shift(g.num, z0, order)
    if g.is_polynomial:
        return num_t / g.den[0]
    den_t = taylor_shift(g.den, z0, order)
    if abs(den_t[0]) < 1e-12 * (1.0 + float(np.max(np.abs(g.den)))):
        raise ValueError("periodic point sits on a pole of the iterated map")
    return series_divide(num_t, den_t, order)


def schroeder_coefficients(
    fmap: RationalMap,
    point: PeriodicPoint | complex,
    order: int = DEFAULT_ORDER,
    period: int | None = None,
    residual_tol: float = RESIDUAL_TOL,
) -> SchroederSeries:
    """Build the linearizer series at a repelling periodic point.

    `point` is either a PeriodicPoint or a bare complex (then `period`
    defaults to 1 and the multiplier is computed here).  Raises on
    non-repelling multipliers.
    """
    if isinstance(point, PeriodicPoint):
        z0, p, lam = point.point, point.period, point.multiplier
    else:
        z0, p = complex(point), period or 1
        lam = fmap.cycle_multiplier(z0, p)
    if is_inf(z0):
        raise ValueError("linearization at the point at infinity is not supported; "
                         "conjugate the map by 1/z first")
    if classify_multiplier(lam) != CLASS_REPELLING:
        raise ValueError(f"multiplier {lam} is not repelling")
    if order < 2:
        raise ValueError("truncation order must be >= 2")

    res = chi(fmap.evaluate(z0, p), z0)
    if res > 1e-6:
        raise ValueError(f"point is not periodic within tolerance (residual {res:.2e})")

    g = fmap.iterate_map(p)
    G = _taylor_of_iterate(g, z0, order)
    # the w^1 match forces the multiplier to equal the local derivative of
    # the expanded iterate; trust that value, cross-check the chain rule
    if abs(G[1] - lam) > 1e-6 * (1 + abs(lam)):
        raise ValueError(
            f"multiplier mismatch: chain rule {lam}, local derivative {G[1]}"
        )
    lam = complex(G[1])

    N = order
    a = np.zeros(N + 1, dtype=np.complex128)
    a[0] = z0
    a[1] = 1.0
    # P[m][n] = coefficient of w^n in (h(w) - z0)^m; filled column by column
    P = np.zeros((N + 1, N + 1), dtype=np.complex128)
    P[0, 0] = 1.0
    P[1, 1] = 1.0
    lam_pows = lam ** np.arange(N + 1)
    phi = np.zeros(N + 1, dtype=np.complex128)
    phi[1] = 1.0
    for n in range(2, N + 1):
        for m in range(2, n + 1):
            # sum_{j=1}^{n-m+1} phi_j P[m-1][n-j]
            j = np.arange(1, n - m + 2)
            P[m, n] = np.dot(phi[j], P[m - 1, n - j])
        rhs = np.dot(G[2 : n + 1], P[2 : n + 1, n])
        a[n] = rhs / (lam_pows[n] - lam)
        phi[n] = a[n]
        P[1, n] = a[n]

    series = SchroederSeries(
        fmap=fmap, z0=z0, period=p, multiplier=complex(lam), coeffs=a, r_safe=1.0
    )
    r_safe = estimate_safe_radius(series, residual_tol=residual_tol)
    return SchroederSeries(
        fmap=fmap, z0=z0, period=p, multiplier=complex(lam), coeffs=a, r_safe=r_safe
    )


def estimate_safe_radius(
    series: SchroederSeries,
    residual_tol: float = RESIDUAL_TOL,
    samples: int = 32,
    grid: int = 48,
) -> float:
    """Largest radius on a geometric grid where (i) the tail root-test proxy
    keeps the truncated terms geometrically small and (ii) the functional
    equation residual on the circle is below tolerance.

    The root test uses the tail half of the coefficients: the leading
    coefficients say nothing about the convergence radius.
    """
    a = np.abs(series.coeffs)
    n0 = max(2, series.order // 2)
    idx = np.arange(n0, series.order + 1)
    tail = a[n0:]
    nz = tail > 0
    if nz.any():
        proxy = float(np.max(tail[nz] ** (1.0 / idx[nz])))
        r_max = 0.5 / proxy
    else:
        r_max = 1e6
    r_max = min(r_max, 1e6)
    r_min = min(1e-8, r_max / 2)

    curve: list[tuple[float, float]] = []
    ratio = (r_max / r_min) ** (1.0 / (grid - 1))
    for j in range(grid):
        r = r_max / ratio**j
        res = series.functional_residual(r, samples=samples)
        curve.append((r, res))
        if res < residual_tol:
            return float(r)
    raise SafeRadiusError(
        "no radius passed the functional-equation residual test "
        f"(best {min(c[1] for c in curve):.3e} at tolerance {residual_tol:.1e})",
        curve,
    )


def critical_points_of_h(
    series: SchroederSeries,
    box: tuple[complex, complex] | float,
    grid: int = 256,
    residual_cap: float = 1e-8,
    max_points: int = 64,
) -> list[tuple[complex, float]]:
    """Approximate zeros of h' inside a rectangle.

    `box` is either a half-width R (square centered at 0) or a pair of
    corners (lo, hi).  Grid scan for local minima of |h'|, then a damped
    secant-Newton refinement on h'.  Returns (w, |h'(w)|) pairs.
    """
    if isinstance(box, (int, float)):
        lo, hi = complex(-box, -box), complex(box, box)
    else:
        lo, hi = box
    xs = np.linspace(lo.real, hi.real, grid)
    ys = np.linspace(lo.imag, hi.imag, grid)
    W = xs[None, :] + 1j * ys[:, None]
    H = series.evaluate_many(W)
    finite = np.isfinite(H.real) & np.isfinite(H.imag)
    Hc = np.where(finite, H, 0.0)
    # analytic, so d/dx approximates the complex derivative where finite
    mag = np.abs(np.gradient(Hc, xs, axis=1))
    mag[~finite] = np.inf

    # local minima not exceeded by any 8-neighbor
    pad = np.pad(mag, 1, constant_values=np.inf)
    is_min = np.ones_like(mag, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            is_min &= mag <= pad[1 + di : 1 + di + mag.shape[0], 1 + dj : 1 + dj + mag.shape[1]]
    cand = np.argwhere(is_min & np.isfinite(mag))
    cand = sorted(cand, key=lambda ij: mag[ij[0], ij[1]])
    seeds = [complex(W[i, j]) for i, j in cand[: 4 * max_points]]

    hstep = max(abs(hi - lo) / grid * 1e-3, 1e-9)
    out: list[tuple[complex, float]] = []
    for w in seeds:
        z = w
        ok = False
        for _ in range(60):
            _, d0 = series.h_prime(z)
            if is_inf(d0):
                break
            if abs(d0) < residual_cap:
                ok = True
                break
            _, dp = series.h_prime(z + hstep)
            _, dm = series.h_prime(z - hstep)
            second = (dp - dm) / (2 * hstep)
            if abs(second) < 1e-300:
                break
            step = d0 / second
            if abs(step) > abs(hi - lo) / 8:
                step *= (abs(hi - lo) / 8) / abs(step)
            z = z - step
        if not ok:
            continue
        if not (lo.real - hstep <= z.real <= hi.real + hstep and lo.imag - hstep <= z.imag <= hi.imag + hstep):
            continue
        if any(abs(z - prev) < 1e-5 * (1 + abs(prev)) for prev, _ in out):
            continue
        out.append((z, abs(series.h_prime(z)[1])))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out
