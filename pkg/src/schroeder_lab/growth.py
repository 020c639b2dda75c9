"""Growth order of the linearizer.

The theoretical order is p log d / log|lam| (Valiron); the empirical order
is the slope of log log max|h| against log r, measured on circles whose
radii grow geometrically with ratio |lam| so that each circle costs exactly
one more pullback depth.  Entire case only: max-modulus readings use the
log-tracking evaluator, so radii up to 1e6 are fine even when |h| overflows
double precision by thousands of digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schroeder import SchroederSeries


class GrowthDomainError(ValueError):
    """Raised for non-entire evaluators; the spherical characteristic needed
    for meromorphic growth is out of scope here."""


@dataclass(frozen=True)
class GrowthProfile:
    radii: np.ndarray
    log_max: np.ndarray  # L(r) = log max_{|w|=r} |h(w)|
    slope: float
    rho_theory: float | None = None

    @property
    def loglog(self) -> np.ndarray:
        return np.log(np.maximum(self.log_max, 1e-300))

    def to_csv(self) -> str:
        lines = ["r,L,loglogL,slope"]
        ll = self.loglog
        for r, L, y in zip(self.radii, self.log_max, ll):
            lines.append(f"{float(r)!r},{float(L)!r},{float(y)!r},{float(self.slope)!r}")
        return "\n".join(lines) + "\n"


def valiron_order(d: int, p: int, lam: complex) -> float:
    """p log d / log|lam|; rejects non-repelling multipliers."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    if abs(lam) <= 1.0:
        raise ValueError(f"|multiplier| = {abs(lam)} <= 1")
    return p * math.log(d) / math.log(abs(lam))


def dca_budget(rho: float, entire: bool) -> tuple[int, int | None]:
    """(cap on direct singularities, cap on finite-value singularities).

    The direct cap is floor(max(2 rho, 1)); the finite-value cap floor(2 rho)
    applies only to entire functions and is None otherwise.
    """
    if rho < 0:
        raise ValueError("order must be nonnegative")
    direct = int(math.floor(max(2 * rho, 1.0) + 1e-12))
    finite = int(math.floor(2 * rho + 1e-12)) if entire else None
    return direct, finite


def _circle_log_max(log_abs, r: float, samples: int, refine_iters: int = 40) -> float:
    ang = 2.0 * math.pi * np.arange(samples) / samples
    vals = log_abs(r * np.exp(1j * ang))
    i = int(np.argmax(vals))
    best = float(vals[i])
    # golden-section sharpening around the best sample
    lo = ang[i] - 2.0 * math.pi / samples
    hi = ang[i] + 2.0 * math.pi / samples
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(log_abs(np.array([r * np.exp(1j * c)]))[0])
    fd = float(log_abs(np.array([r * np.exp(1j * d)]))[0])
    for _ in range(refine_iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(log_abs(np.array([r * np.exp(1j * c)]))[0])
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(log_abs(np.array([r * np.exp(1j * d)]))[0])
    return max(best, fc, fd)


def empirical_order(
    evaluator,
    radii=None,
    samples: int = 512,
    r_max: float = 1e6,
    threads: int = 1,
) -> tuple[float, GrowthProfile]:
    """Least-squares slope of log L(r) vs log r over the largest decade.

    `evaluator` is a SchroederSeries (entire case enforced) or any callable
    mapping a complex array to complex values (used for control inputs).
    """
    rho_theory = None
    if isinstance(evaluator, SchroederSeries):
        if not evaluator.fmap.is_polynomial:
            raise GrowthDomainError(
                "empirical order needs an entire linearizer; use a polynomial map"
            )
        log_abs = lambda w: evaluator.log_abs_many(w, threads=threads)
        rho_theory = valiron_order(
            evaluator.fmap.degree, evaluator.period, evaluator.multiplier
        )
        if radii is None:
            q = abs(evaluator.multiplier)
            n = int(math.floor(math.log(r_max / evaluator.r_safe) / math.log(q)))
            radii = evaluator.r_safe * q ** np.arange(1, max(n + 1, 4))
    else:
        raw = evaluator
        def log_abs(w):
            vals = np.asarray(raw(w))
            return np.log(np.maximum(np.abs(vals), 1e-300))
        if radii is None:
            radii = np.geomspace(1.0, r_max, 24)

    radii = np.asarray(radii, dtype=float)
    L = np.array([_circle_log_max(log_abs, float(r), samples) for r in radii])

    window = radii >= radii[-1] / 10.0
    if window.sum() < 2:
        window = np.ones_like(radii, dtype=bool)
    x = np.log(radii[window])
    y = np.log(np.maximum(L[window], 1e-300))
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, GrowthProfile(radii=radii, log_max=L, slope=slope, rho_theory=rho_theory)
