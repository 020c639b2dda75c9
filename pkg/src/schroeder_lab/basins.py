"""Components of the escaping region of the linearizer, their rotation data,
asymptotic arcs and the resulting multiplier inequality report.

For a polynomial map the basin of infinity is connected and membership is an
escape-time test on h-values.  Each unbounded component W of h^{-1}(basin)
is periodic under multiplication by the multiplier; the census extracts

  q_inf  - number of unbounded components,
  q      - common cycle length under the multiplier action,
  p_inf  - index shift of the cyclic order around the origin,
  m_inf  - q_inf / q cycles,
  p      - p_inf / m_inf,

and the inequality check compares

  q_inf * (1 + ((arg lam - 2 pi p / q) / log|lam|)^2)  <=  2 log d / log|lam|

with the branch of arg lam that minimizes the spiral term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .schroeder import SchroederSeries
from .sphere import INF, chi, is_inf
from .tracts import (
    BOX_SCALES,
    ComponentGrid,
    _match_scaled,
    grid_points,
    label_components,
    pixel_of,
)

ESCAPE_RADIUS = 1e6
ESCAPE_ITERS = 120


class ArcError(RuntimeError):
    pass


@dataclass
class ArcTrace:
    """A path gamma with gamma(t+1) = lam^N gamma(t) built from one in-mask
    segment from w0 to lam^N w0; the argument is continued along the path."""

    ts: np.ndarray
    points: np.ndarray
    args: np.ndarray
    images: np.ndarray | None
    lam: complex
    N: int
    delta_period: float  # continued arg increment over one period

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.args / np.log(np.abs(self.points))


@dataclass
class PlyReport:
    q_inf: int
    p_inf: int
    m_inf: int
    q: int
    p: int
    arg_branch: float
    lhs: float
    rhs: float
    slack: float
    el: bool | None = None
    violation: bool = False

    def to_json(self) -> dict:
        return {
            "q_inf": self.q_inf,
            "p_inf": self.p_inf,
            "m_inf": self.m_inf,
            "q": self.q,
            "p": self.p,
            "arg_branch": self.arg_branch,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "el": self.el,
            "violation": self.violation,
        }


@dataclass
class BasinCensus:
    q_inf: int
    q: int
    p_inf: int
    m_inf: int
    p: int
    permutation: dict[int, int]
    order: list[int]  # component ids in cyclic order
    arcs: dict[int, ArcTrace]
    grid: ComponentGrid
    unbounded_ids: list[int]
    artifact: bool = False
    notes: list[str] = field(default_factory=list)


def escape_mask(
    series: SchroederSeries,
    R: float,
    n: int,
    escape_radius: float = ESCAPE_RADIUS,
    max_iter: int = ESCAPE_ITERS,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """(mask of escaping h-values, iteration counts) on the pixel grid."""
    if not series.fmap.is_polynomial:
        raise ValueError("escape classification requires a polynomial map")
    H = series.evaluate_many(grid_points(R, n), threads=threads)
    fc = np.ascontiguousarray(series.fmap.num)
    T = kernels.escape_time(fc, np.ascontiguousarray(H.ravel()), max_iter, escape_radius)
    T = T.reshape(H.shape)
    return T >= 0, T


def in_mask_path(
    grid: ComponentGrid, label: int, w0: complex, w1: complex
) -> np.ndarray:
    """Pixel-center path from w0 to w1 inside one labeled component, found as
    a minimum-cost route; endpoints are kept exact."""
    from skimage.graph import route_through_array

    mask = grid.labels == label
    p0 = pixel_of(w0, grid.R, grid.n)
    p1 = pixel_of(w1, grid.R, grid.n)
    if p0 is None or p1 is None or not mask[p0] or not mask[p1]:
        raise ArcError(
            f"arc endpoints {w0:.4g} -> {w1:.4g} are not inside the component"
        )
    costs = np.where(mask, 1.0, 1e9)
    path_idx, cost = route_through_array(costs, p0, p1, fully_connected=True, geometric=True)
    if cost >= 1e8:
        raise ArcError("no in-mask path between the arc endpoints")
    W = grid_points(grid.R, grid.n)
    pts = np.array([W[i, j] for i, j in path_idx], dtype=np.complex128)
    pts[0] = w0
    pts[-1] = w1
    return pts


def _continued_args(points: np.ndarray) -> np.ndarray:
    args = np.empty(len(points))
    args[0] = math.atan2(points[0].imag, points[0].real)
    for i in range(1, len(points)):
        step = np.angle(points[i] / points[i - 1])
        args[i] = args[i - 1] + step
    return args


def trace_asymptotic_arc(
    grid: ComponentGrid,
    label: int,
    w0: complex,
    lam: complex,
    N: int,
    series: SchroederSeries | None = None,
    min_reach: float = 1e4,
    max_periods: int = 64,
    samples_per_period: int = 128,
) -> ArcTrace:
    """Arc through w0 satisfying gamma(t+1) = lam^N gamma(t) exactly, with the
    base segment routed inside the component mask."""
    lamN = lam**N
    w1 = lamN * w0
    base = in_mask_path(grid, label, w0, w1)
    if len(base) > samples_per_period:
        idx = np.unique(np.linspace(0, len(base) - 1, samples_per_period).astype(int))
        base = base[idx]
    base_args = _continued_args(base)
    delta = float(base_args[-1] - base_args[0])

    periods = 1
    while periods < max_periods and abs(lamN) ** periods * abs(w0) < min_reach:
        periods += 1

    seg_t = np.linspace(0.0, 1.0, len(base))
    ts, pts, args = [], [], []
    for k in range(periods):
        scale = lamN**k
        sl = slice(None) if k == 0 else slice(1, None)
        ts.append(seg_t[sl] + k)
        pts.append(base[sl] * scale)
        args.append(base_args[sl] + k * delta)
    ts = np.concatenate(ts)
    pts = np.concatenate(pts)
    args = np.concatenate(args)
    images = series.evaluate_many(pts) if series is not None else None
    return ArcTrace(ts=ts, points=pts, args=args, images=images, lam=lam, N=N,
                    delta_period=delta)


def spiral_term(arc: ArcTrace, min_modulus: float = 1e4) -> float:
    """Running maximum of (arg / log|gamma|)^2 over the tail half."""
    mod = np.abs(arc.points)
    if mod.max() < min_modulus:
        raise ArcError(f"arc reaches only |gamma| = {mod.max():.3g} < {min_modulus:.3g}")
    half = arc.ts >= arc.ts[-1] / 2
    usable = half & (mod > 1.0)
    r = arc.ratios[usable]
    return float(np.max(r**2))


def minimizing_arg_branch(lam: complex, p: int, q: int) -> float:
    """Branch of arg lam closest to 2 pi p / q."""
    base = math.atan2(lam.imag, lam.real)
    target = 2.0 * math.pi * p / q
    k = round((target - base) / (2.0 * math.pi))
    return base + 2.0 * math.pi * k


def spiral_closed_form(q: int, p: int, lam: complex) -> float:
    arg = minimizing_arg_branch(lam, p, q)
    return (q * arg - 2.0 * math.pi * p) / (q * math.log(abs(lam)))


def ply_check(
    q_inf: int,
    p: int,
    q: int,
    lam: complex,
    d: int,
    period: int = 1,
    el: bool | None = None,
) -> PlyReport:
    """Left and right sides of the multiplier inequality; lhs > rhs raises a
    flag (a numerical artifact upstream), it is never silently accepted."""
    if q_inf < 1:
        raise ValueError("q_inf must be >= 1")
    if abs(lam) <= 1:
        raise ValueError("multiplier must be repelling")
    arg = minimizing_arg_branch(lam, p, q)
    loglam = math.log(abs(lam))
    term = (arg - 2.0 * math.pi * p / q) / loglam
    lhs = q_inf * (1.0 + term * term)
    rhs = 2.0 * period * math.log(d) / loglam
    slack = rhs - lhs
    return PlyReport(
        q_inf=q_inf, p_inf=0, m_inf=0, q=q, p=p,
        arg_branch=arg, lhs=lhs, rhs=rhs, slack=slack, el=el,
        violation=bool(lhs > rhs + 1e-9),
    )


def el_condition(
    series: SchroederSeries,
    R: float,
    n: int = 256,
    escape_radius: float = ESCAPE_RADIUS,
    max_iter: int = ESCAPE_ITERS,
    threads: int = 1,
) -> bool:
    """Heuristic for 'the Julia component through the base point is not a
    single point': pixels whose h-values sit near the Julia set (mixed
    escape neighborhoods, or very slow escape) form a mask; the condition
    holds when the mask component through w = 0 leaves the box."""
    esc, T = escape_mask(series, R, n, escape_radius, max_iter, threads=threads)
    boundary = ndimage.binary_dilation(esc, structure=np.ones((3, 3))) & ~esc
    slow = T >= int(0.6 * max_iter)
    near = boundary | slow
    labels, _ = ndimage.label(near, structure=np.ones((3, 3)))
    origin = pixel_of(0.0, R, n)
    lab = labels[origin] if origin else 0
    if lab == 0:
        # fall back to the nearest near-J pixel within a small neighborhood
        ii, jj = np.nonzero(near)
        if len(ii) == 0:
            return False
        W = grid_points(R, n)
        d2 = np.abs(W[ii, jj])
        k = int(np.argmin(d2))
        if d2[k] > 4 * R / n:
            return False
        lab = labels[ii[k], jj[k]]
    comp = labels == lab
    return bool(comp[0, :].any() or comp[-1, :].any() or comp[:, 0].any() or comp[:, -1].any())


def basin_census(
    series: SchroederSeries,
    R: float | None = None,
    n: int = 256,
    escape_radius: float = ESCAPE_RADIUS,
    max_iter: int = ESCAPE_ITERS,
    threads: int = 1,
    rho_cap: float | None = None,
    auto_refine: int = 2,
    trace_arcs: bool = True,
) -> BasinCensus:
    """Unbounded components of h^{-1}(basin of infinity) with rotation data.

    When the component count exceeds the growth-order cap the grid is
    refined; if the excess persists the census is flagged as an artifact.
    """
    if not series.fmap.is_polynomial:
        raise ValueError("basin census requires a polynomial map")
    lam = series.multiplier
    if R is None:
        R = 4.0 * series.r_safe * abs(lam)

    notes: list[str] = []
    for attempt in range(auto_refine + 1):
        census = _census_once(series, R, n, escape_radius, max_iter, threads, trace_arcs)
        if rho_cap is None or census.q_inf <= rho_cap:
            census.notes.extend(notes)
            return census
        notes.append(
            f"q_inf={census.q_inf} exceeds cap {rho_cap:.3g} at n={n}; refining"
        )
        n *= 2
    census.artifact = True
    census.notes = notes + ["component count still above the cap; flagged as artifact"]
    return census


def _census_once(series, R, n, escape_radius, max_iter, threads, trace_arcs) -> BasinCensus:
    lam = series.multiplier
    grids: dict[int, ComponentGrid] = {}
    for s in BOX_SCALES:
        esc, _ = escape_mask(series, s * R, n, escape_radius, max_iter, threads=threads)
        grids[s] = label_components(esc, s * R, n)

    # base-box components that reconnect on a larger box are one tract:
    # group boundary-touching base components by their largest-box identity
    base = grids[1]
    big = grids[BOX_SCALES[-1]]
    mid = grids[BOX_SCALES[1]]
    groups: dict[int, list[int]] = {}
    for lab, info in sorted(base.info.items()):
        if not info.touches_boundary:
            continue
        m2 = _match_scaled(info, mid)
        m4 = _match_scaled(info, big)
        if m2 == 0 or m4 == 0:
            continue
        if not (mid.info[m2].touches_boundary and big.info[m4].touches_boundary):
            continue
        groups.setdefault(m4, []).append(lab)
    unbounded = sorted(groups)  # group ids are labels on the largest box
    q_inf = len(unbounded)
    if q_inf == 0:
        raise RuntimeError("no unbounded escaping component found; enlarge the box")

    # multiplier action on the groups, located on the largest box
    perm: dict[int, int] = {}
    for gid in unbounded:
        votes: dict[int, int] = {}
        pts = list(big.info[gid].samples) + [big.info[gid].min_abs_point]
        for lab in groups[gid]:
            pts.extend(base.info[lab].samples[:4])
            pts.append(base.info[lab].min_abs_point)
        for w in pts:
            tgt = big.locate(lam * w)
            if tgt in groups:
                votes[tgt] = votes.get(tgt, 0) + 1
        if votes:
            perm[gid] = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    if sorted(perm) != unbounded or sorted(set(perm.values())) != unbounded:
        raise RuntimeError(
            f"multiplier action is not a permutation of the unbounded components: {perm}"
        )

    # common cycle length
    qs = {}
    for lab in unbounded:
        cur, steps = perm[lab], 1
        while cur != lab:
            cur = perm[cur]
            steps += 1
        qs[lab] = steps
    q = qs[unbounded[0]]
    notes = []
    if any(v != q for v in qs.values()):
        notes.append(f"cycle lengths differ across components: {qs}")
        q = max(qs.values())

    arcs: dict[int, ArcTrace] = {}
    crossings: dict[int, complex] = {}
    ref = 0.5 * R
    if trace_arcs or q_inf > 1:
        for gid in unbounded:
            w0 = _arc_seed(big, gid, lam, qs[gid], R)
            arc = trace_asymptotic_arc(big, gid, w0, lam, qs[gid], series=None,
                                       min_reach=max(1e4, 2 * ref))
            arcs[gid] = arc
            crossings[gid] = _first_crossing(arc, ref)

    if q_inf == 1:
        order = unbounded
        p_inf = 0
    else:
        order = sorted(unbounded, key=lambda lab: (math.atan2(crossings[lab].imag,
                                                              crossings[lab].real),
                                                   abs(crossings[lab])))
        index = {lab: i for i, lab in enumerate(order)}
        shifts = {(index[perm[lab]] - index[lab]) % q_inf for lab in unbounded}
        if len(shifts) == 1:
            p_inf = shifts.pop()
        else:
            notes.append(f"inconsistent cyclic shifts {shifts}; using the smallest")
            p_inf = min(shifts)

    m_inf, m_rem = divmod(q_inf, q)
    if m_rem:
        notes.append(f"q_inf={q_inf} not divisible by q={q}")
        m_inf = max(m_inf, 1)
    p, p_rem = divmod(p_inf, m_inf) if m_inf else (0, 0)
    if p_rem:
        notes.append(f"p_inf={p_inf} not divisible by m_inf={m_inf}")

    return BasinCensus(
        q_inf=q_inf, q=q, p_inf=p_inf, m_inf=m_inf, p=p,
        permutation=perm, order=order, arcs=arcs, grid=big,
        unbounded_ids=unbounded, notes=notes,
    )


def _arc_seed(grid: ComponentGrid, label: int, lam: complex, q: int, R: float) -> complex:
    """Deterministic arc base point: an interior pixel of small modulus whose
    q-step image stays well inside the box."""
    mask = grid.labels == label
    interior = ndimage.binary_erosion(mask, structure=np.ones((3, 3)))
    if not interior.any():
        interior = mask
    W = grid_points(grid.R, grid.n)
    cand = W[interior]
    cand = cand[np.abs(cand) * abs(lam) ** q < 0.8 * grid.R]
    if len(cand) == 0:
        cand = W[interior]
        cand = cand[np.abs(cand) < 0.8 * grid.R / abs(lam) ** q]
    if len(cand) == 0:
        raise ArcError("component has no interior point with in-box multiplier orbit")
    k = int(np.lexsort((cand.imag, cand.real, np.abs(cand)))[0])
    return complex(cand[k])


def _first_crossing(arc: ArcTrace, radius: float) -> complex:
    mod = np.abs(arc.points)
    above = np.nonzero(mod >= radius)[0]
    if len(above) == 0:
        raise ArcError(f"arc never reaches |w| = {radius:.3g}")
    i = int(above[0])
    if i == 0:
        return complex(arc.points[0])
    a, b = arc.points[i - 1], arc.points[i]
    ma, mb = mod[i - 1], mod[i]
    t = (radius - ma) / (mb - ma) if mb > ma else 1.0
    return complex(a + t * (b - a))
