"""Numerical tract families: unbounded preimage components of spherical disks.

A candidate singularity over a value `a` is a chain of nested connected
components of {w : chi(h(w), a) < r} along a decreasing radius ladder.
Unboundedness is never provable from a finite grid; the working proxy is
persistent boundary contact across three box sizes R, 2R, 4R.  A chain that
stays unbounded at every rung and contains no solution of h(w) = a in its
deepest rung is classified direct; with solutions persisting in every rung
it is indirect; chains that become bounded are regular preimages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .schroeder import SchroederSeries
from .sphere import INF, chi, chi_many, is_inf

VERDICT_DIRECT = "direct"
VERDICT_INDIRECT = "indirect"
VERDICT_REGULAR = "not-a-singularity"
VERDICT_INCONCLUSIVE = "inconclusive"

DEFAULT_RADII = (0.2, 0.05, 0.0125, 0.003125)
BOX_SCALES = (1, 2, 4)

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


class BoxEscapeError(RuntimeError):
    """Mapped sample points left the probe box; enlarge it."""


def grid_points(R: float, n: int) -> np.ndarray:
    """Pixel-center grid on [-R, R]^2; row i is the imaginary direction."""
    step = 2.0 * R / n
    xs = -R + (np.arange(n) + 0.5) * step
    return xs[None, :] + 1j * xs[:, None]


def pixel_of(w: complex, R: float, n: int) -> tuple[int, int] | None:
    step = 2.0 * R / n
    j = int(math.floor((w.real + R) / step))
    i = int(math.floor((w.imag + R) / step))
    if 0 <= i < n and 0 <= j < n:
        return i, j
    return None


@dataclass
class ComponentInfo:
    label: int
    pixels: int
    touches_boundary: bool
    samples: list[complex]
    min_abs_point: complex
    best_point: complex  # smallest chi(h, a) inside; root-search seed


@dataclass
class ComponentGrid:
    R: float
    n: int
    labels: np.ndarray
    info: dict[int, ComponentInfo]

    def locate(self, w: complex) -> int:
        px = pixel_of(w, self.R, self.n)
        if px is None:
            return 0
        return int(self.labels[px])


def label_components(
    mask: np.ndarray, R: float, n: int, score: np.ndarray | None = None, max_samples: int = 12
) -> ComponentGrid:
    labels, count = ndimage.label(mask, structure=_FOUR_CONN)
    W = grid_points(R, n)
    info: dict[int, ComponentInfo] = {}
    if count:
        on_edge = np.zeros_like(mask)
        on_edge[0, :] = on_edge[-1, :] = on_edge[:, 0] = on_edge[:, -1] = True
        edge_labels = set(np.unique(labels[on_edge & mask]).tolist()) - {0}
        objects = ndimage.find_objects(labels)
        for lab in range(1, count + 1):
            sl = objects[lab - 1]
            sub = labels[sl] == lab
            pts = W[sl][sub]
            npix = int(sub.sum())
            stride = max(1, npix // max_samples)
            samples = [complex(z) for z in pts[::stride][:max_samples]]
            amin = int(np.argmin(np.abs(pts)))
            if score is not None:
                sc = score[sl][sub]
                best = complex(pts[int(np.argmin(sc))])
            else:
                best = complex(pts[amin])
            info[lab] = ComponentInfo(
                label=lab,
                pixels=npix,
                touches_boundary=lab in edge_labels,
                samples=samples,
                min_abs_point=complex(pts[amin]),
                best_point=best,
            )
    return ComponentGrid(R=R, n=n, labels=labels, info=info)


def h_on_grid(series: SchroederSeries, R: float, n: int, threads: int = 1) -> np.ndarray:
    return series.evaluate_many(grid_points(R, n), threads=threads)


def preimage_components(
    series: SchroederSeries,
    a: complex,
    r: float,
    R: float,
    n: int,
    threads: int = 1,
    H: np.ndarray | None = None,
) -> ComponentGrid:
    """Connected components of {chi(h, a) < r} on the box, 4-connected."""
    if H is None:
        H = h_on_grid(series, R, n, threads=threads)
    dist = chi_many(H, a)
    return label_components(dist < r, R, n, score=dist)


@dataclass
class TractRung:
    radius: float
    component: int  # label on the base box
    scaled_components: dict[int, int]  # box scale -> label (0 when lost)
    unbounded: bool
    roots: list[complex]


@dataclass
class TractFamily:
    value: complex
    rungs: list[TractRung]
    verdict: str
    stable: bool
    deep_samples: list[complex]

    @property
    def unbounded(self) -> bool:
        return all(r.unbounded for r in self.rungs)


@dataclass
class ValueProbe:
    value: complex
    radii: tuple[float, ...]
    R: float
    n: int
    grids: dict[tuple[int, int], ComponentGrid]  # (box scale, rung index) -> grid
    families: list[TractFamily]
    rung_has_unbounded: list[bool] = field(default_factory=list)  # over all components


def _match_scaled(base_info: ComponentInfo, grid: ComponentGrid) -> int:
    votes: dict[int, int] = {}
    for s in [base_info.best_point, base_info.min_abs_point] + base_info.samples:
        lab = grid.locate(s)
        if lab:
            votes[lab] = votes.get(lab, 0) + 1
    if not votes:
        return 0
    return max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]


def find_roots_in_component(
    series: SchroederSeries,
    a: complex,
    grid: ComponentGrid,
    label: int,
    H: np.ndarray,
    max_roots: int = 5,
    tol: float = 1e-9,
) -> list[complex]:
    """Damped Newton refinement of the best residual pixels inside a mask.

    For a = infinity and a polynomial map the answer is empty exactly (the
    linearizer is entire); for rational maps pole search runs on 1/h.
    """
    pole_mode = is_inf(a)
    if pole_mode and series.fmap.is_polynomial:
        return []
    mask = grid.labels == label
    dist = chi_many(H, a)
    dist = np.where(mask, dist, np.inf)
    flat = np.argsort(dist, axis=None, kind="stable")
    W = grid_points(grid.R, grid.n)
    seeds = []
    taken: list[complex] = []
    for idx in flat[: 40 * max_roots]:
        i, j = np.unravel_index(idx, dist.shape)
        if not np.isfinite(dist[i, j]):
            break
        w = complex(W[i, j])
        if all(abs(w - t) > grid.R / 12 for t in taken):
            seeds.append(w)
            taken.append(w)
        if len(seeds) >= 3 * max_roots:
            break

    roots: list[complex] = []
    for w in seeds:
        z = w
        ok = False
        for _ in range(60):
            hv, dv = series.h_prime(z)
            if is_inf(hv) or is_inf(dv) or abs(dv) < 1e-300:
                break
            step = (-hv / dv) if pole_mode else ((hv - a) / dv)
            # a true zero pulls the Newton step to zero; an asymptotic value
            # keeps it bounded away (the residual alone cannot tell them apart)
            converged_step = abs(step) < 1e-7 * (1.0 + abs(z))
            if pole_mode:
                if abs(hv) > 1e12 and converged_step:
                    ok = True
                    break
            elif chi(hv, a) < tol and converged_step:
                ok = True
                break
            if abs(step) > grid.R / 4:
                step *= (grid.R / 4) / abs(step)
            z = z - step
        if not ok:
            continue
        if grid.locate(z) != label:
            continue
        if any(abs(z - r0) < 1e-6 * (1 + abs(r0)) for r0 in roots):
            continue
        roots.append(z)
        if len(roots) >= max_roots:
            break
    roots.sort(key=lambda z: (abs(z), z.real, z.imag))
    return roots


def classify_singularity(family: TractFamily) -> str:
    """Verdict from rung structure: needs >= 3 stable rungs.

    A root of h = a found in one rung's component need not lie in the next
    (smaller) component of the chain, so every rung is searched on its own:
    roots in all rungs while unbounded means indirect, roots in none means
    direct, a mixture means the box cut off the evidence.
    """
    if len(family.rungs) < 3 or not family.stable:
        return VERDICT_INCONCLUSIVE
    if not all(r.unbounded for r in family.rungs):
        return VERDICT_REGULAR
    rooted = [bool(r.roots) for r in family.rungs]
    if all(rooted):
        return VERDICT_INDIRECT
    if not any(rooted):
        return VERDICT_DIRECT
    return VERDICT_INCONCLUSIVE


def probe_value(
    series: SchroederSeries,
    a: complex,
    radii=DEFAULT_RADII,
    R: float = 20.0,
    n: int = 384,
    threads: int = 1,
    root_search: bool = True,
) -> ValueProbe:
    """All tract chains over one target value.

    Chains are anchored at the deepest-rung components on the base box and
    walked up through the nesting (smaller-radius masks are subsets, so the
    parent always exists).
    """
    radii = tuple(sorted(radii, reverse=True))
    Hs = {s: h_on_grid(series, s * R, n, threads=threads) for s in BOX_SCALES}
    dists = {s: chi_many(Hs[s], a) for s in BOX_SCALES}
    grids: dict[tuple[int, int], ComponentGrid] = {}
    for ri, r in enumerate(radii):
        for s in BOX_SCALES:
            grids[(s, ri)] = label_components(dists[s] < r, s * R, n, score=dists[s])

    def rung_unbounded(ri: int, base_label: int) -> tuple[bool, dict[int, int]]:
        binfo = grids[(1, ri)].info[base_label]
        scaled = {1: base_label}
        flag = binfo.touches_boundary
        for s in BOX_SCALES[1:]:
            slab = _match_scaled(binfo, grids[(s, ri)])
            scaled[s] = slab
            if slab == 0 or not grids[(s, ri)].info[slab].touches_boundary:
                flag = False
        return flag, scaled

    deepest = len(radii) - 1
    families: list[TractFamily] = []
    root_cache: dict[tuple[int, int], list[complex]] = {}
    base_deep = grids[(1, deepest)]
    for lab, cinfo in sorted(base_deep.info.items()):
        rungs: list[TractRung] = []
        stable = True
        child_info = cinfo
        chain_labels = {deepest: lab}
        for ri in range(deepest - 1, -1, -1):
            parent = _match_scaled(child_info, grids[(1, ri)])
            if parent == 0:
                stable = False
                break
            chain_labels[ri] = parent
            child_info = grids[(1, ri)].info[parent]
        if not stable:
            families.append(
                TractFamily(value=a, rungs=[], verdict=VERDICT_INCONCLUSIVE,
                            stable=False, deep_samples=cinfo.samples)
            )
            continue
        for ri in range(len(radii)):
            base = grids[(1, ri)]
            blab = chain_labels[ri]
            unbounded, scaled = rung_unbounded(ri, blab)
            roots: list[complex] = []
            if root_search:
                key = (ri, blab)
                if key not in root_cache:
                    root_cache[key] = find_roots_in_component(series, a, base, blab, Hs[1])
                roots = root_cache[key]
            rungs.append(
                TractRung(radius=radii[ri], component=blab, scaled_components=scaled,
                          unbounded=unbounded, roots=roots)
            )
        fam = TractFamily(value=a, rungs=rungs, verdict="", stable=True,
                          deep_samples=base_deep.info[lab].samples)
        fam.verdict = classify_singularity(fam)
        families.append(fam)

    rung_has_unbounded = [
        any(rung_unbounded(ri, lab)[0] for lab in grids[(1, ri)].info)
        for ri in range(len(radii))
    ]
    return ValueProbe(value=a, radii=radii, R=R, n=n, grids=grids,
                      families=families, rung_has_unbounded=rung_has_unbounded)


def lambda_action(
    probe_src: ValueProbe,
    probe_dst: ValueProbe,
    lam: complex,
) -> dict[int, int]:
    """Match unbounded chains over a to chains over f^p(a) by multiplying
    deep-rung sample points by the multiplier and locating the containing
    component.  Raises BoxEscapeError when the image leaves every probe box;
    the resulting map is checked injective."""
    src = [i for i, f in enumerate(probe_src.families) if f.stable and f.unbounded]
    dst = [i for i, f in enumerate(probe_dst.families) if f.stable and f.unbounded]
    mapping: dict[int, int] = {}
    for i in src:
        fam = probe_src.families[i]
        pts = [lam * w for w in fam.deep_samples]
        target = None
        for ri in range(len(probe_dst.radii) - 1, -1, -1):
            votes: dict[int, int] = {}
            for s in BOX_SCALES:
                grid = probe_dst.grids[(s, ri)]
                for w in pts:
                    lab = grid.locate(w)
                    if lab:
                        for j in dst:
                            if probe_dst.families[j].rungs[ri].scaled_components.get(s) == lab:
                                votes[j] = votes.get(j, 0) + 1
            if votes:
                target = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]
                break
        if target is None:
            if all(pixel_of(w, BOX_SCALES[-1] * probe_dst.R, probe_dst.n) is None for w in pts):
                raise BoxEscapeError(
                    f"images of tract samples under the multiplier left the box "
                    f"(|w| up to {max(abs(w) for w in pts):.3g}); enlarge it"
                )
            continue
        mapping[i] = target
    values = list(mapping.values())
    if len(set(values)) != len(values):
        raise RuntimeError(f"multiplier action is not injective: {mapping}")
    return mapping


def action_cycles(mapping: dict[int, int]) -> list[list[int]]:
    """Cycle decomposition of a self-matching (fixed target value)."""
    seen: set[int] = set()
    cycles: list[list[int]] = []
    for start in sorted(mapping):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        cur = mapping[start]
        while cur != start:
            if cur in seen or cur not in mapping:
                cyc = []
                break
            cyc.append(cur)
            seen.add(cur)
            cur = mapping[cur]
        if cyc:
            cycles.append(cyc)
    return cycles


COVER_COMPLETE = "covers-completely"
COVER_TRACT = "unbounded-tract-found"
COVER_INCONCLUSIVE = "inconclusive"


def complete_covering_probe(
    series: SchroederSeries,
    a: complex,
    radii=DEFAULT_RADII,
    R: float = 20.0,
    n: int = 384,
    threads: int = 1,
) -> tuple[str, ValueProbe]:
    """Does some spherical disk around `a` pull back to bounded components
    only?  Requires an entire linearizer."""
    if not series.fmap.is_polynomial:
        raise ValueError("complete-covering probe requires an entire linearizer")
    probe = probe_value(series, a, radii=radii, R=R, n=n, threads=threads,
                        root_search=True)
    # "bounded at some radius" scans every component at that rung, not just
    # the chains that reach the deepest rung
    nonempty = [
        ri for ri in range(len(probe.radii)) if probe.grids[(1, ri)].info
    ]
    for ri in nonempty:
        if not probe.rung_has_unbounded[ri]:
            return COVER_COMPLETE, probe
    if any(f.stable and f.unbounded for f in probe.families):
        return COVER_TRACT, probe
    return COVER_INCONCLUSIVE, probe
