"""Rational self-maps of the Riemann sphere in coefficient form.

A map f = num/den is stored as two ascending coefficient arrays.  All
iteration happens in homogeneous coordinates (Z : W), renormalized after
every step, so orbits pass through poles and the point at infinity without
overflow.  Periodic points are found by expanding f^p and solving
f^p(z) = z with the simultaneous all-roots iteration; multipliers come from
the chain rule with chart changes at infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .roots import all_roots, cluster_points
from .sphere import INF, chi, is_inf, normalize_point

CLASS_SUPERATTRACTING = "superattracting"
CLASS_ATTRACTING = "attracting"
CLASS_PARABOLIC = "parabolic"
CLASS_INDIFFERENT = "indifferent-undetermined"
CLASS_REPELLING = "repelling"

PERIOD_FILTER_TOL = 1e-8
DEGREE_BUDGET = 4096


def _trim(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128).ravel()
    if c.size == 0:
        return np.zeros(1, dtype=np.complex128)
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        return np.zeros(1, dtype=np.complex128)
    nz = np.nonzero(np.abs(c) > scale * 1e-14)[0]
    return np.array(c[: nz[-1] + 1]) if nz.size else np.zeros(1, dtype=np.complex128)


def classify_multiplier(
    lam: complex,
    eps: float = 1e-9,
    parabolic_nmax: int = 64,
    parabolic_tol: float = 1e-6,
) -> str:
    """Multiplier classification; Cremer and Siegel both come back as
    'indifferent-undetermined' since they cannot be told apart numerically."""
    a = abs(lam)
    if a == 0.0:
        return CLASS_SUPERATTRACTING
    if abs(a - 1.0) <= eps:
        acc = 1.0 + 0.0j
        for _ in range(parabolic_nmax):
            acc *= lam
            if abs(acc - 1.0) < parabolic_tol:
                return CLASS_PARABOLIC
        return CLASS_INDIFFERENT
    if a < 1.0:
        return CLASS_ATTRACTING
    return CLASS_REPELLING


@dataclass(frozen=True)
class PeriodicPoint:
    point: complex
    period: int
    multiplier: complex
    classification: str
    residual: float = 0.0
    multiplicity: int = 1

    @property
    def is_repelling(self) -> bool:
        return self.classification == CLASS_REPELLING


@dataclass(frozen=True)
class ExceptionalSet:
    points: tuple[complex, ...]

    def __contains__(self, z: complex) -> bool:
        return any(chi(z, a) < 1e-6 for a in self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class RationalMap:
    num: np.ndarray
    den: np.ndarray

    def __init__(self, num, den=None, validate: bool = True):
        object.__setattr__(self, "num", _trim(num))
        object.__setattr__(self, "den", _trim([1.0] if den is None else den))
        if validate:
            self._validate()

    def _validate(self) -> None:
        if np.all(self.den == 0):
            raise ValueError("denominator is identically zero")
        if self.degree < 2:
            raise ValueError(f"degree {self.degree} < 2")
        if len(self.den) > 1:
            for r in all_roots(self.den):
                scale = np.sum(np.abs(self.num) * np.abs(r) ** np.arange(len(self.num)))
                if abs(npoly.polyval(r, self.num)) < 1e-9 * max(scale, 1e-300):
                    raise ValueError(f"numerator and denominator share a root near {r}")

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    @classmethod
    def polynomial(cls, coeffs) -> "RationalMap":
        return cls(coeffs)

    @classmethod
    def unicritical(cls, d: int, c: complex) -> "RationalMap":
        coeffs = np.zeros(d + 1, dtype=np.complex128)
        coeffs[0] = c
        coeffs[d] = 1.0
        return cls(coeffs)

    @classmethod
    def from_json(cls, obj: dict) -> "RationalMap":
        num = [complex(re, im) for re, im in obj["num"]]
        den = [complex(re, im) for re, im in obj["den"]] if "den" in obj else None
        return cls(num, den)

    def to_json(self) -> dict:
        out = {"num": [[float(a.real), float(a.imag)] for a in self.num]}
        if not self.is_polynomial:
            out["den"] = [[float(a.real), float(a.imag)] for a in self.den]
        return out

    # --- homogeneous evaluation -------------------------------------------

    @cached_property
    def hom_coeffs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(num, num reversed, den, den reversed), all padded to degree d."""
        d = self.degree
        ph = np.zeros(d + 1, dtype=np.complex128)
        qh = np.zeros(d + 1, dtype=np.complex128)
        ph[: len(self.num)] = self.num
        qh[: len(self.den)] = self.den
        return ph, ph[::-1].copy(), qh, qh[::-1].copy()

    def _step_pair(self, Z: complex, W: complex) -> tuple[complex, complex]:
        ph, pr, qh, qr = self.hom_coeffs
        if abs(Z) <= abs(W):
            t = Z / W
            F = npoly.polyval(t, ph)
            G = npoly.polyval(t, qh)
        else:
            t = W / Z
            F = npoly.polyval(t, pr)
            G = npoly.polyval(t, qr)
        m = max(abs(F), abs(G))
        if m == 0.0:
            return 1.0, 0.0
        return F / m, G / m

    def evaluate(self, z: complex, k: int = 1) -> complex:
        """f^k(z) on the sphere.  k = 0 returns z."""
        if k < 0:
            raise ValueError("iteration count must be >= 0")
        if is_inf(z):
            Z, W = 1.0 + 0.0j, 0.0 + 0.0j
        else:
            m = max(abs(z), 1.0)
            Z, W = z / m, 1.0 / m
        for _ in range(k):
            Z, W = self._step_pair(Z, W)
        if abs(W) * 1e280 <= abs(Z):
            return INF
        return normalize_point(Z / W)

    def __call__(self, z: complex) -> complex:
        return self.evaluate(z, 1)

    # --- derivatives -------------------------------------------------------

    @cached_property
    def _wronskian(self) -> np.ndarray:
        """num' * den - num * den', ascending; its roots are the finite
        critical points (poles included) with correct multiplicity."""
        n, d = self.num, self.den
        w = npoly.polysub(npoly.polymul(npoly.polyder(n), d), npoly.polymul(n, npoly.polyder(d)))
        return _trim(w)

    def derivative(self, z: complex) -> complex:
        """f'(z) in the plane chart (both z and f(z) finite)."""
        return npoly.polyval(z, self._wronskian) / npoly.polyval(z, self.den) ** 2

    def reciprocal_precompose(self) -> "RationalMap":
        """u -> f(1/u)."""
        ph, pr, qh, qr = self.hom_coeffs
        return RationalMap(pr, qr, validate=False)

    def reciprocal_postcompose(self) -> "RationalMap":
        """z -> 1/f(z)."""
        return RationalMap(self.den, self.num, validate=False)

    def reciprocal_conjugate(self) -> "RationalMap":
        """u -> 1/f(1/u); the map in the chart at infinity."""
        ph, pr, qh, qr = self.hom_coeffs
        return RationalMap(qr, pr, validate=False)

    def chart_derivative(self, z: complex) -> complex:
        """Derivative of one step z -> f(z) with the chart 1/w used at
        whichever end is infinite; chain-rule products of these factors give
        cycle multipliers."""
        fz = self.evaluate(z, 1)
        if not is_inf(z):
            if not is_inf(fz):
                return self.derivative(z)
            m = self.reciprocal_postcompose()
            return m.derivative(z)
        m = self.reciprocal_precompose()
        if not is_inf(fz):
            return m.derivative(0.0)
        return self.reciprocal_conjugate().derivative(0.0)

    def cycle_multiplier(self, z0: complex, period: int) -> complex:
        lam = 1.0 + 0.0j
        z = z0
        for _ in range(period):
            lam *= self.chart_derivative(z)
            z = self.evaluate(z, 1)
        return lam

    # --- iteration in coefficient form --------------------------------------

    def iterate_map(self, p: int) -> "RationalMap":
        """Expanded coefficients of f^p (degree d^p; budget-capped)."""
        if self.degree**p > DEGREE_BUDGET:
            raise ValueError(
                f"degree {self.degree}^{p} exceeds the solver budget of {DEGREE_BUDGET}"
            )
        num, den = self.num, self.den
        for _ in range(p - 1):
            num, den = self._substitute(num, den)
        return RationalMap(num, den, validate=False)

    def _substitute(self, n: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients of f(n/d) as a single fraction."""
        deg = self.degree
        pows_n = [np.array([1.0 + 0.0j])]
        pows_d = [np.array([1.0 + 0.0j])]
        for _ in range(deg):
            pows_n.append(_trim(npoly.polymul(pows_n[-1], n)))
            pows_d.append(_trim(npoly.polymul(pows_d[-1], d)))
        ph, _, qh, _ = self.hom_coeffs
        new_n = np.zeros(1, dtype=np.complex128)
        new_d = np.zeros(1, dtype=np.complex128)
        for i in range(deg + 1):
            term = npoly.polymul(pows_n[i], pows_d[deg - i])
            if ph[i] != 0:
                new_n = npoly.polyadd(new_n, ph[i] * term)
            if qh[i] != 0:
                new_d = npoly.polyadd(new_d, qh[i] * term)
        return _trim(new_n), _trim(new_d)

    # --- point sets ----------------------------------------------------------

    def critical_points(self) -> list[tuple[complex, int]]:
        """Finite critical points with multiplicity, plus infinity when the
        total falls short of 2d - 2."""
        w = self._wronskian
        out: list[tuple[complex, int]] = []
        if len(w) > 1:
            roots = all_roots(w)
            out = cluster_points(roots, 1e-6)
        total = sum(m for _, m in out)
        deficit = 2 * self.degree - 2 - total
        if deficit > 0:
            out.append((INF, deficit))
        return out

    def preimages(self, a: complex, cluster_tol: float = 1e-9) -> list[tuple[complex, int]]:
        """f^{-1}(a) with multiplicity, including infinity when appropriate."""
        d = self.degree
        if is_inf(a):
            poly = self.den
            at_inf = len(self.num) - 1 > len(self.den) - 1
        else:
            poly = _trim(npoly.polysub(self.num, a * self.den))
            at_inf = len(poly) - 1 < d
        out: list[tuple[complex, int]] = []
        if len(poly) > 1:
            out = cluster_points(all_roots(poly), cluster_tol)
        if is_inf(a):
            if at_inf:
                out.append((INF, d - (len(self.den) - 1)))
        else:
            deficit = d - sum(m for _, m in out)
            if at_inf and deficit > 0:
                out.append((INF, deficit))
        return out

    def pull_back(
        self, points: list[tuple[complex, int]], cluster_tol: float = 1e-7
    ) -> list[tuple[complex, int]]:
        """One-step preimage of a weighted point set, weights multiplied
        through root multiplicities and re-clustered."""
        raw: list[tuple[complex, int]] = []
        for a, w in points:
            for z, m in self.preimages(a):
                raw.append((z, w * m))
        merged: list[tuple[complex, int]] = []
        for z, w in raw:
            for i, (c, wc) in enumerate(merged):
                if (is_inf(z) and is_inf(c)) or (
                    not is_inf(z) and not is_inf(c) and abs(z - c) <= cluster_tol * (1 + abs(c))
                ):
                    merged[i] = (c, wc + w)
                    break
            else:
                merged.append((z, w))
        return merged

    # --- periodic points -----------------------------------------------------

    def periodic_points(self, p: int) -> list[PeriodicPoint]:
        """All exact-period-p points with multipliers; lower-period solutions
        of f^p(z) = z are filtered out."""
        g = self.iterate_map(p)
        phi = _trim(npoly.polysub(g.num, npoly.polymul([0.0, 1.0], g.den)))
        finite = all_roots(phi) if len(phi) > 1 else np.zeros(0, dtype=np.complex128)
        clustered = cluster_points(finite, 1e-9)

        candidates: list[tuple[complex, int]] = list(clustered)
        if chi(self.evaluate(INF, p), INF) < 1e-9:
            mult_inf = self.degree**p + 1 - sum(m for _, m in clustered)
            candidates.append((INF, max(mult_inf, 1)))

        out = []
        for z, m in candidates:
            if not self._has_exact_period(z, p):
                continue
            lam = self.cycle_multiplier(z, p)
            res = chi(self.evaluate(z, p), z)
            out.append(
                PeriodicPoint(
                    point=z,
                    period=p,
                    multiplier=complex(lam),
                    classification=classify_multiplier(lam),
                    residual=float(res),
                    multiplicity=m,
                )
            )
        out.sort(key=lambda pp: (is_inf(pp.point), pp.point.real if not is_inf(pp.point) else 0.0,
                                 pp.point.imag if not is_inf(pp.point) else 0.0))
        return out

    def _has_exact_period(self, z: complex, p: int) -> bool:
        for q in range(1, p):
            if p % q != 0:
                continue
            fz = self.evaluate(z, q)
            if is_inf(z):
                close = is_inf(fz)
            else:
                close = (not is_inf(fz)) and abs(fz - z) < PERIOD_FILTER_TOL * (1 + abs(z))
            if close:
                return False
        return True

    def fixed_point_count(self, p: int) -> int:
        """Fixed points of f^p on the sphere, counted with multiplicity."""
        g = self.iterate_map(p)
        phi = _trim(npoly.polysub(g.num, npoly.polymul([0.0, 1.0], g.den)))
        finite = sum(m for _, m in cluster_points(all_roots(phi), 1e-9)) if len(phi) > 1 else 0
        if chi(self.evaluate(INF, p), INF) < 1e-9:
            return self.degree**p + 1
        return finite

    # --- exceptional set -------------------------------------------------------

    def exceptional_set(self) -> ExceptionalSet:
        """Points a with f^{-2}(a) = {a}; at most two exist."""
        candidates: list[complex] = []
        g = self.iterate_map(2)
        phi = _trim(npoly.polysub(g.num, npoly.polymul([0.0, 1.0], g.den)))
        if len(phi) > 1:
            candidates.extend(z for z, _ in cluster_points(all_roots(phi), 1e-8))
        if chi(self.evaluate(INF, 2), INF) < 1e-9:
            candidates.append(INF)

        found: list[complex] = []
        for a in candidates:
            pre1 = self.preimages(a)
            if len(pre1) != 1:
                continue
            b = pre1[0][0]
            pre2 = self.preimages(b)
            if len(pre2) == 1 and chi(pre2[0][0], a) < 1e-6:
                if not any(chi(a, c) < 1e-6 for c in found):
                    found.append(normalize_point(a) if not is_inf(a) else INF)
        found.sort(key=lambda z: (is_inf(z), z.real if not is_inf(z) else 0.0,
                                  z.imag if not is_inf(z) else 0.0))
        return ExceptionalSet(tuple(found))
