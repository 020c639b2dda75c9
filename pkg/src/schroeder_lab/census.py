"""Singularity census: probe candidate target values, classify the tracts,
and cross-check the detected singular values against the dynamical sets
they must land in.

Candidate values are the non-repelling periodic points (plus infinity for
polynomials and the recurrent-critical clusters): anything outside that
list cannot carry a singularity, and the crosscheck verifies the detections
actually landed inside it.  Discrepancies are reported, never corrected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import (
    CLASS_ATTRACTING,
    CLASS_INDIFFERENT,
    CLASS_PARABOLIC,
    CLASS_REPELLING,
    CLASS_SUPERATTRACTING,
    RationalMap,
)
from .growth import dca_budget, valiron_order
from .orbits import ManeSetApprox, mane_set_approx
from .schroeder import SchroederSeries
from .sphere import INF, chi, is_inf
from .tracts import (
    DEFAULT_RADII,
    VERDICT_DIRECT,
    VERDICT_INDIRECT,
    ValueProbe,
    probe_value,
)

AT_CLASSES = (CLASS_SUPERATTRACTING, CLASS_ATTRACTING)


@dataclass
class DynamicsSets:
    attracting: list[complex]
    parabolic: list[complex]
    undetermined: list[complex]
    mane: ManeSetApprox

    @classmethod
    def compute(cls, fmap: RationalMap, max_period: int | None = None,
                orbit_length: int = 4000) -> "DynamicsSets":
        if max_period is None:
            max_period = 1
            while fmap.degree ** (max_period + 1) <= 64:
                max_period += 1
        at, pb, und = [], [], []
        for p in range(1, max_period + 1):
            for pp in fmap.periodic_points(p):
                bucket = None
                if pp.classification in AT_CLASSES:
                    bucket = at
                elif pp.classification == CLASS_PARABOLIC:
                    bucket = pb
                elif pp.classification == CLASS_INDIFFERENT:
                    bucket = und
                if bucket is not None and not any(chi(pp.point, q) < 1e-8 for q in bucket):
                    bucket.append(pp.point)
        return cls(attracting=at, parabolic=pb, undetermined=und,
                   mane=mane_set_approx(fmap, length=orbit_length))

    def candidate_values(self) -> list[complex]:
        vals = list(self.attracting) + list(self.parabolic) + list(self.undetermined)
        vals.extend(self.mane.points)
        out: list[complex] = []
        for v in vals:
            if not any(chi(v, w) < 1e-8 for w in out):
                out.append(v)
        out.sort(key=lambda z: (is_inf(z), z.real if not is_inf(z) else 0.0,
                                z.imag if not is_inf(z) else 0.0))
        return out


@dataclass
class CensusResult:
    probes: dict[complex, ValueProbe]
    sets: DynamicsSets
    rho: float
    direct_values: list[complex] = field(default_factory=list)
    indirect_values: list[complex] = field(default_factory=list)

    @property
    def direct_count(self) -> int:
        return sum(
            1
            for probe in self.probes.values()
            for f in probe.families
            if f.verdict == VERDICT_DIRECT
        )

    @property
    def finite_value_count(self) -> int:
        return sum(
            1
            for a, probe in self.probes.items()
            if not is_inf(a)
            for f in probe.families
            if f.verdict in (VERDICT_DIRECT, VERDICT_INDIRECT)
        )


def singularity_census(
    series: SchroederSeries,
    values: list[complex] | None = None,
    radii=DEFAULT_RADII,
    R: float = 20.0,
    n: int = 256,
    threads: int = 1,
    sets: DynamicsSets | None = None,
) -> CensusResult:
    fmap = series.fmap
    if sets is None:
        sets = DynamicsSets.compute(fmap)
    if values is None:
        values = sets.candidate_values()
        if fmap.is_polynomial and not any(is_inf(v) for v in values):
            values.append(INF)
    probes: dict[complex, ValueProbe] = {}
    direct_vals, indirect_vals = [], []
    for a in values:
        probe = probe_value(series, a, radii=radii, R=R, n=n, threads=threads)
        probes[a] = probe
        verdicts = {f.verdict for f in probe.families}
        if VERDICT_DIRECT in verdicts:
            direct_vals.append(a)
        if VERDICT_INDIRECT in verdicts:
            indirect_vals.append(a)
    rho = valiron_order(fmap.degree, series.period, series.multiplier)
    return CensusResult(probes=probes, sets=sets, rho=rho,
                        direct_values=direct_vals, indirect_values=indirect_vals)


def crosscheck_singular_values(
    census: CensusResult,
    periodic_action: dict[complex, bool] | None = None,
    tol: float = 1e-6,
) -> dict:
    """Three location checks for the detected singular values.

    (i) direct values sit on attracting periodic points; (ii) values whose
    tracts are periodic under the multiplier action sit on attracting,
    parabolic or undetermined-indifferent points; (iii) every detected value
    sits in the union of those with the recurrent-critical clusters.
    Returns a report dict; mismatches are listed, not repaired.
    """
    sets = census.sets
    at = sets.attracting
    atpbcm = at + sets.parabolic + sets.undetermined
    everything = atpbcm + sets.mane.points

    def near(a, pool) -> bool:
        return any(chi(a, q) < tol for q in pool)

    report = {
        "direct_in_attracting": True,
        "periodic_in_non_repelling": True,
        "all_in_unhyperbolic": True,
        "mismatches": [],
    }
    for a in census.direct_values:
        if not near(a, at):
            report["direct_in_attracting"] = False
            report["mismatches"].append(("direct", a))
    detected = census.direct_values + census.indirect_values
    for a in detected:
        if not near(a, everything):
            report["all_in_unhyperbolic"] = False
            report["mismatches"].append(("unhyperbolic", a))
    if periodic_action:
        for a, is_periodic in periodic_action.items():
            if is_periodic and not near(a, atpbcm):
                report["periodic_in_non_repelling"] = False
                report["mismatches"].append(("periodic", a))
    return report
