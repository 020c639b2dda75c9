"""Critical orbits, omega-limit sets, the recurrent-critical cluster set and
the covering-degree probe.

The probe measures, for growing k, the covering degree of f^k over a small
spherical disk around a target point.  Degrees are computed as 1 + (number
of critical preimages inside the component, with multiplicity); preimage
sets are built by recursive pullback of weighted points, so multiplicities
are tracked without ever expanding huge polynomials.  Components that fall
below pixel scale on the base grid are re-examined in zoomed windows around
the relevant preimages of the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .dynamics import RationalMap
from .sphere import INF, chi, chi_many, is_inf
from .tracts import grid_points, label_components, pixel_of

DEFAULT_ORBIT_LENGTH = 10_000
DEFAULT_CLUSTER_EPS = 1e-3


@dataclass
class OrbitData:
    start: complex
    points: np.ndarray  # sphere points, inf convention
    escaped: bool
    tail_start: int


@dataclass
class OmegaCluster:
    center: complex
    spread: float
    hits: int


@dataclass
class OmegaLimitApprox:
    start: complex
    clusters: list[OmegaCluster]
    recurrent: bool


@dataclass
class ManeSetApprox:
    points: list[complex]
    contributors: list[complex]

    def __contains__(self, z: complex) -> bool:
        return any(chi(z, a) < 1e-2 for a in self.points)


def critical_orbit(
    fmap: RationalMap,
    c: complex,
    length: int = DEFAULT_ORBIT_LENGTH,
    escape_radius: float = 1e8,
) -> OrbitData:
    pts = np.empty(length + 1, dtype=np.complex128)
    z = c
    escaped = False
    k = 0
    pts[0] = z if not is_inf(z) else INF
    for k in range(1, length + 1):
        z = fmap.evaluate(z, 1)
        pts[k] = z if not is_inf(z) else INF
        if fmap.is_polynomial and (is_inf(z) or abs(z) > escape_radius):
            escaped = True
            break
    pts = pts[: k + 1]
    return OrbitData(start=c, points=pts, escaped=escaped,
                     tail_start=len(pts) // 2)


def omega_limit(
    orbit: OrbitData,
    eps: float = DEFAULT_CLUSTER_EPS,
    tail_fraction: float = 0.5,
    min_hits: int = 3,
) -> OmegaLimitApprox:
    """Chordal eps-clustering of the orbit tail.  Escaped orbits have
    omega = {infinity}."""
    if orbit.escaped:
        return OmegaLimitApprox(
            start=orbit.start,
            clusters=[OmegaCluster(center=INF, spread=0.0, hits=len(orbit.points))],
            recurrent=is_inf(orbit.start),
        )
    tail = orbit.points[int(len(orbit.points) * (1.0 - tail_fraction)):]
    clusters: list[list] = []  # [center, spread, hits]
    for z in tail:
        placed = False
        for cl in clusters:
            d = chi(z, cl[0])
            if d < eps:
                cl[1] = max(cl[1], d)
                cl[2] += 1
                placed = True
                break
        if not placed:
            clusters.append([complex(z) if not is_inf(z) else INF, 0.0, 1])
    kept = [OmegaCluster(center=c, spread=s, hits=h) for c, s, h in clusters if h >= min_hits]
    kept.sort(key=lambda cl: -cl.hits)
    recurrent = any(chi(orbit.start, cl.center) < eps for cl in kept)
    return OmegaLimitApprox(start=orbit.start, clusters=kept, recurrent=recurrent)


def julia_membership(
    fmap: RationalMap,
    z: complex,
    eps: float = 1e-4,
    max_iter: int = 200,
    escape_radius: float = 1e6,
    ring_samples: int = 12,
) -> bool:
    """Polynomial case: an eps-ring around the point shows mixed escape
    behavior.  Rational case: derivative growth of the iterates on the ring
    (a non-normality proxy)."""
    if is_inf(z):
        return False
    ring = z + eps * np.exp(2j * math.pi * np.arange(ring_samples) / ring_samples)
    if fmap.is_polynomial:
        fc = np.ascontiguousarray(fmap.num)
        pts = np.concatenate([[z], ring]).astype(np.complex128)
        t = kernels.escape_time(fc, pts, max_iter, escape_radius)
        esc = t >= 0
        return bool(esc.any() and (~esc).any())
    growth = 0.0
    for w in ring:
        val, dval = complex(w), 1.0 + 0.0j
        for _ in range(60):
            dval *= fmap.chart_derivative(val)
            val = fmap.evaluate(val, 1)
            if abs(dval) > 1e12:
                break
        growth = max(growth, abs(dval))
    return growth > 1e10


def mane_set_approx(
    fmap: RationalMap,
    length: int = DEFAULT_ORBIT_LENGTH,
    eps: float = DEFAULT_CLUSTER_EPS,
) -> ManeSetApprox:
    """Union of omega-limit clusters over recurrent critical points that pass
    the Julia-membership heuristic.  Empty is a common and valid answer."""
    points: list[complex] = []
    contributors: list[complex] = []
    for c, _m in fmap.critical_points():
        if is_inf(c):
            continue
        if not julia_membership(fmap, c):
            continue
        om = omega_limit(critical_orbit(fmap, c, length=length), eps=eps)
        if not om.recurrent:
            continue
        contributors.append(c)
        for cl in om.clusters:
            if not any(chi(cl.center, p) < eps for p in points):
                points.append(cl.center)
    return ManeSetApprox(points=points, contributors=contributors)


# --- covering-degree probe ----------------------------------------------------


@dataclass
class ProbeDepth:
    k: int
    max_degree: int
    component_count: int
    refined_windows: int
    partial: bool  # some component was unresolvable at this depth


@dataclass
class ProbeReport:
    target: complex
    radius: float
    depths: list[ProbeDepth]
    growing: bool
    depth_marker: int | None  # first depth with unresolved components
    notes: list[str] = field(default_factory=list)

    @property
    def degrees(self) -> list[int]:
        return [d.max_degree for d in self.depths]


def _weighted_points_in(points: list[tuple[complex, int]], mask: np.ndarray,
                        R: float, n: int) -> int:
    total = 0
    for z, w in points:
        if is_inf(z):
            continue
        px = pixel_of(z, R, n)
        if px is not None and mask[px]:
            total += w
    return total


def semihyperbolicity_probe(
    fmap: RationalMap,
    a: complex,
    r: float = 0.05,
    k_max: int = 8,
    base_box: float = 2.0,
    base_grid: int = 512,
    window_grid: int = 64,
    max_windows: int = 64,
    threads: int = 1,
    min_pixels: int = 9,
) -> ProbeReport:
    """Max covering degree of f^k over the disk U_r(a) for k = 1..k_max.

    Works in the chart at infinity when a is the point at infinity.  Degree
    of a component = 1 + critical preimages inside (with multiplicity).
    """
    notes: list[str] = []
    if is_inf(a):
        fmap = fmap.reciprocal_conjugate()
        a = 0.0
        notes.append("probing in the reciprocal chart")
    if fmap.degree ** k_max > 4096:
        k_max = int(math.log(4096) / math.log(fmap.degree))
        notes.append(f"depth capped at {k_max} by the preimage budget")

    ph, pr, qh, qr = fmap.hom_coeffs
    W = grid_points(base_box, base_grid)
    Z = np.ascontiguousarray(W.ravel().astype(np.complex128))
    Wh = np.ones_like(Z)

    crit = [(c, m) for c, m in fmap.critical_points()]
    crit_pre: list[tuple[complex, int]] = []  # union of f^-j(C), j < k
    frontier: list[tuple[complex, int]] = list(crit)
    target_pre: list[tuple[complex, int]] = [(a, 1)]

    depths: list[ProbeDepth] = []
    depth_marker: int | None = None
    for k in range(1, k_max + 1):
        crit_pre = _merge_weighted(crit_pre + frontier)
        frontier = fmap.pull_back(frontier)
        target_pre = fmap.pull_back(target_pre)

        kernels.rat_iterate(ph, pr, qh, qr, Z, Wh, 1)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            vals = np.where(np.abs(Wh) * 1e280 <= np.abs(Z), INF, Z / np.where(Wh == 0, 1.0, Wh))
        dist = chi_many(vals.reshape(W.shape), a)
        grid = label_components(dist < r, base_box, base_grid, score=dist)

        max_deg = 0
        partial = False
        refined = 0
        resolved_pixels = np.zeros_like(grid.labels, dtype=bool)
        for lab, info in grid.info.items():
            if info.pixels < min_pixels:
                continue
            mask = grid.labels == lab
            resolved_pixels |= mask
            count = _weighted_points_in(crit_pre, mask, base_box, base_grid)
            if info.touches_boundary:
                partial = True  # clipped by the box; degree is a lower bound
            max_deg = max(max_deg, 1 + count)

        # target preimages not captured by a resolved component get zoomed
        # windows; they decide bounded degrees that the base grid cannot see
        unresolved = []
        for z, _w in target_pre:
            if is_inf(z):
                continue
            px = pixel_of(z, base_box, base_grid)
            if px is None:
                continue
            if not resolved_pixels[px]:
                unresolved.append(z)
        if unresolved:
            unresolved.sort(key=lambda z: (z.real, z.imag))
            for z in unresolved[:max_windows]:
                deg = _window_degree(fmap, a, r, k, z, crit_pre, window_grid)
                refined += 1
                if deg is None:
                    partial = True
                    if depth_marker is None:
                        depth_marker = k
                else:
                    max_deg = max(max_deg, deg)
            if len(unresolved) > max_windows:
                partial = True
                if depth_marker is None:
                    depth_marker = k
                notes.append(
                    f"depth {k}: {len(unresolved)} zoom windows needed, "
                    f"{max_windows} examined"
                )
        depths.append(ProbeDepth(k=k, max_degree=max_deg,
                                 component_count=len(grid.info),
                                 refined_windows=refined, partial=partial))

    degs = [d.max_degree for d in depths]
    growing = len(degs) >= 3 and degs[-1] > degs[0] and degs[-1] > degs[-2] >= degs[-3]
    return ProbeReport(target=a, radius=r, depths=depths, growing=growing,
                       depth_marker=depth_marker, notes=notes)


def _merge_weighted(points: list[tuple[complex, int]], tol: float = 1e-7):
    merged: list[tuple[complex, int]] = []
    for z, w in points:
        for i, (c, wc) in enumerate(merged):
            same = (is_inf(z) and is_inf(c)) or (
                not is_inf(z) and not is_inf(c) and abs(z - c) <= tol * (1 + abs(c))
            )
            if same:
                merged[i] = (c, wc + w)
                break
        else:
            merged.append((z, w))
    return merged


def _orbit_derivative(fmap: RationalMap, z: complex, k: int) -> float:
    d = 1.0
    for _ in range(k):
        dv = fmap.chart_derivative(z)
        d *= max(abs(dv), 1e-300)
        z = fmap.evaluate(z, 1)
        if is_inf(z):
            break
    return d


def _window_degree(
    fmap: RationalMap,
    a: complex,
    r: float,
    k: int,
    z_star: complex,
    crit_pre: list[tuple[complex, int]],
    window_grid: int,
) -> int | None:
    """Degree of the component around one preimage of the target, resolved in
    a local window sized from the orbit derivative.  None when the component
    is clipped by the window (degree would be a guess)."""
    deriv = _orbit_derivative(fmap, z_star, k)
    size = 6.0 * r / max(deriv, 1e-12)
    size = min(max(size, 1e-9), 1.0)
    xs = np.linspace(-size, size, window_grid)
    W = (xs[None, :] + 1j * xs[:, None]) + z_star
    ph, pr, qh, qr = fmap.hom_coeffs
    Z = np.ascontiguousarray(W.ravel().astype(np.complex128))
    Wh = np.ones_like(Z)
    kernels.rat_iterate(ph, pr, qh, qr, Z, Wh, k)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        vals = np.where(np.abs(Wh) * 1e280 <= np.abs(Z), INF, Z / np.where(Wh == 0, 1.0, Wh))
    dist = chi_many(vals.reshape(W.shape), a).reshape(W.shape)
    mask = dist < r
    labels, count = ndimage.label(mask)
    ci = window_grid // 2
    lab = labels[ci, ci]
    if lab == 0:
        nz = np.argwhere(mask)
        if len(nz) == 0:
            return None
        d2 = (nz[:, 0] - ci) ** 2 + (nz[:, 1] - ci) ** 2
        i, j = nz[int(np.argmin(d2))]
        lab = labels[i, j]
    comp = labels == lab
    if comp[0, :].any() or comp[-1, :].any() or comp[:, 0].any() or comp[:, -1].any():
        return None  # clipped; caller records a partial depth
    step = 2 * size / window_grid
    total = 1
    for z, w in crit_pre:
        if is_inf(z):
            continue
        jj = int((z.real - (z_star.real - size)) / step)
        ii = int((z.imag - (z_star.imag - size)) / step)
        if 0 <= ii < window_grid and 0 <= jj < window_grid and comp[ii, jj]:
            total += w
    return total
