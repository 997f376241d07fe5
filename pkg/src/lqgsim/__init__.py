"""Stochastic toolkit for mating-of-trees descriptions of random surfaces.

The package simulates the correlated two-dimensional Brownian boundary-length
process, its cone excursions, the closed-form cone and disk-area laws they
satisfy, one-dimensional field-average processes of wedges, disks, and beads,
and the discrete mated-CRT map with boundary.  Hot kernels are numba-compiled
when numba is available; set ``LQGSIM_NO_NUMBA=1`` to force the pure-numpy
fallbacks (identical semantics, bit-identical only for sequential chains).
"""

from ._accel import USING_NUMBA
from .area import (
    AreaLaw,
    area_law,
    disk_area_cdf,
    disk_area_pdf,
    mc_area_comparison,
    sample_disk_area,
    sample_disk_areas,
)
from .bm import (
    Path2D,
    RngStream,
    correlated_increments,
    sample_correlated_bm,
    sample_wedge_boundary_process,
    shear_path,
)
from .cone import (
    ANGLE_THETA,
    ANGLE_ZERO,
    BoundaryPoint,
    ConePoint,
    cone_survival,
    exit_point_pdf_given_z,
    powered_coordinate,
    survival_scaling_check,
    tau_marginal_shape,
    time_t_pdf,
)
from .errors import (
    BudgetError,
    DomainError,
    ParameterError,
    QuadratureError,
    SamplingError,
)
from .excursion import (
    ConeExit,
    ExcursionSample,
    duration_accept_prob,
    entrance_batch,
    excursion_durations_mc,
    exit_points_exact,
    exit_points_mc,
    run_until_exit,
    sample_approx_excursion,
    sample_durations_exact,
    sample_exit_point,
    sample_shimura_entrance,
)
from .matedcrt import (
    CellPath,
    MatedCrtGraph,
    build_brute,
    build_fast,
    degree_counts,
    export_graph,
    import_graph,
    mark_boundary,
)
from .params import GAMMA_LITERALS, GammaParams, derive_params, parse_gamma
from .processes import (
    FieldAverageProcess,
    bead_dimension,
    conditioned_positive_paths,
    disk_dimension,
    sample_bessel_excursion_average,
    sample_disk_conditioned_average,
    sample_thick_wedge_average,
)
from .specfun import (
    QuadratureResult,
    integrate_1d,
    reg_gamma_p,
    reg_gamma_q,
    residue_integral,
    residue_integrand,
    truncated_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "__version__",
    "AreaLaw",
    "area_law",
    "disk_area_cdf",
    "disk_area_pdf",
    "mc_area_comparison",
    "sample_disk_area",
    "sample_disk_areas",
    "Path2D",
    "RngStream",
    "correlated_increments",
    "sample_correlated_bm",
    "sample_wedge_boundary_process",
    "shear_path",
    "ANGLE_THETA",
    "ANGLE_ZERO",
    "BoundaryPoint",
    "ConePoint",
    "cone_survival",
    "exit_point_pdf_given_z",
    "powered_coordinate",
    "survival_scaling_check",
    "tau_marginal_shape",
    "time_t_pdf",
    "BudgetError",
    "DomainError",
    "ParameterError",
    "QuadratureError",
    "SamplingError",
    "ConeExit",
    "ExcursionSample",
    "duration_accept_prob",
    "entrance_batch",
    "excursion_durations_mc",
    "exit_points_exact",
    "exit_points_mc",
    "run_until_exit",
    "sample_approx_excursion",
    "sample_durations_exact",
    "sample_exit_point",
    "sample_shimura_entrance",
    "CellPath",
    "MatedCrtGraph",
    "build_brute",
    "build_fast",
    "degree_counts",
    "export_graph",
    "import_graph",
    "mark_boundary",
    "GAMMA_LITERALS",
    "GammaParams",
    "derive_params",
    "parse_gamma",
    "FieldAverageProcess",
    "bead_dimension",
    "conditioned_positive_paths",
    "disk_dimension",
    "sample_bessel_excursion_average",
    "sample_disk_conditioned_average",
    "sample_thick_wedge_average",
    "QuadratureResult",
    "integrate_1d",
    "reg_gamma_p",
    "reg_gamma_q",
    "residue_integral",
    "residue_integrand",
    "truncated_gamma",
]
