"""schroeder-lab: linearizing coordinates at repelling periodic points of
rational maps, their growth, and the geometry of their unbounded preimage
tracts."""

from .basins import (
    ArcTrace,
    BasinCensus,
    PlyReport,
    basin_census,
    el_condition,
    ply_check,
    spiral_closed_form,
    spiral_term,
    trace_asymptotic_arc,
)
from .dynamics import ExceptionalSet, PeriodicPoint, RationalMap, classify_multiplier
from .growth import GrowthProfile, dca_budget, empirical_order, valiron_order
from .orbits import (
    ManeSetApprox,
    OmegaLimitApprox,
    OrbitData,
    critical_orbit,
    mane_set_approx,
    omega_limit,
    semihyperbolicity_probe,
)
from .schroeder import (
    SchroederSeries,
    critical_points_of_h,
    estimate_safe_radius,
    schroeder_coefficients,
)
from .sphere import INF, chi, is_inf
from .tracts import (
    TractFamily,
    ValueProbe,
    classify_singularity,
    complete_covering_probe,
    lambda_action,
    preimage_components,
    probe_value,
)

__version__ = "0.1.0"
