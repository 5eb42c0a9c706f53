"""L^p and logarithmic combinations of symmetric convex polytopes, their
volumes and boundary measures, and numerical checks of log-Brunn-Minkowski
type inequalities."""
from .combinations import (
    CombinationSpec,
    DiagonalScaling,
    GeomMeanBody,
    SlabFamily,
    combine,
    geom_mean_membership,
    cube_section_inclusion_check,
    log_combine,
    log_combine_multi,
    lp_combine,
    scale_body,
    slab_body,
)
from .core import (
    DirectionSet,
    HPolytope,
    Membership,
    SupportProfile,
    box,
    cross_polytope,
    cube,
    default_directions,
    membership,
    normalize_unconditional,
    support,
    vertices,
    wulff,
)
from .lab import (
    Lattice,
    check_log_bm,
    check_log_minkowski,
    check_lp_bm,
    check_lp_minkowski,
    check_multi_minkowski,
    check_prekopa_leindler,
    scan_b_property,
    search_counterexample,
)
from .measures import (
    SphericalMeasure,
    SubspaceSpec,
    VolumeEstimate,
    cone_volume_measure,
    subspace_concentration,
    surface_area_measure,
    volume,
    volume_mc,
)
from .report import CheckReport, Verdict, emit_plot_data
from .structure import (
    DiagonalMap,
    ProductDecomposition,
    classify_equality,
    decompose_irreducible,
    fit_diagonal,
    fit_dilate,
)

__version__ = "0.1.0"
