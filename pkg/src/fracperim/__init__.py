"""Fractional perimeters, the isoperimetric ratio P_t^{1/(n-t)} / P_s^{1/(n-s)} and
its stability around the ball for nearly spherical sets."""
from .specfun import (
    FracParams,
    SpectralTable,
    A_coefficient,
    A_increment,
    A_telescoped,
    ball_volume,
    dim_harmonic,
    lambda_eigenvalue,
    perimeter_ball,
    spectral_table,
    sphere_area,
)
from .sphere import (
    AliasingError,
    QuadratureGrid,
    SphereFunction,
    analyze,
    c1_norm_estimate,
    make_grid,
    seminorm_gagliardo,
    synthesize,
)
from .quadrature import QuadratureError
from .geometry import (
    NearlySphericalSet,
    ProjectionError,
    RegraphError,
    RegraphResult,
    barycenter,
    fraenkel_asymmetry,
    project_constraints,
    regraph,
    volume,
)
from .functionals import (
    KernelEval,
    VariationReport,
    first_variation_F,
    first_variation_P,
    fractional_perimeter,
    kernel_dF,
    kernel_F,
    kernel_G,
    ratio_F,
    ratio_F_ball,
    second_variation_F,
    second_variation_F_at_zero,
    second_variation_P,
)
from .coercivity import (
    CoercivityConstants,
    CoercivityViolation,
    coercivity_lower_bound,
    compute_constants,
    gap,
    scan_positivity,
)

__version__ = "0.1.0"

__all__ = [
    "FracParams",
    "SpectralTable",
    "A_coefficient",
    "A_increment",
    "A_telescoped",
    "ball_volume",
    "dim_harmonic",
    "lambda_eigenvalue",
    "perimeter_ball",
    "spectral_table",
    "sphere_area",
    "AliasingError",
    "QuadratureGrid",
    "SphereFunction",
    "analyze",
    "c1_norm_estimate",
    "make_grid",
    "seminorm_gagliardo",
    "synthesize",
    "QuadratureError",
    "NearlySphericalSet",
    "ProjectionError",
    "RegraphError",
    "RegraphResult",
    "barycenter",
    "fraenkel_asymmetry",
    "project_constraints",
    "regraph",
    "volume",
    "KernelEval",
    "VariationReport",
    "first_variation_F",
    "first_variation_P",
    "fractional_perimeter",
    "kernel_dF",
    "kernel_F",
    "kernel_G",
    "ratio_F",
    "ratio_F_ball",
    "second_variation_F",
    "second_variation_F_at_zero",
    "second_variation_P",
    "CoercivityConstants",
    "CoercivityViolation",
    "coercivity_lower_bound",
    "compute_constants",
    "gap",
    "scan_positivity",
]
