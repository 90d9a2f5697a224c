"""Approximation of manifold-valued functions by projecting linear approximants.

A function with values on an embedded manifold ``M`` in ``R^d`` is
approximated by any linear method on ``R^d``, for instance a Fourier partial
sum, followed by the closest-point projection onto ``M``.  The package provides the projection machinery, reach estimation,
checks of the geometric inequalities behind the error bounds, the bounds
themselves, and an orientation-map denoising pipeline.
"""

__version__ = "0.1.0"

from .approximators import (
    CosineGridSeries,
    CosineSmoother,
    ManifoldApproximator,
    SphereSeries,
    SphericalHarmonicApproximator,
    TorusFourierApproximator,
    TorusSeries,
    cosine_smooth,
    manifold_approximant,
    sphere_coefficients,
    sphere_eval,
    sphere_eval_dtangent,
    torus_coefficients,
    torus_eval,
    torus_eval_deriv,
)
from .bounds import ErrorReport, build_report, diff_bound, fourier_constants, sobolev_norm_torus, value_bound
from .core import (
    ManifoldModel,
    ShapeOperator,
    TangentBasis,
    distance_to_manifold,
    dprojection,
    dprojection_fd,
    project,
    shape_operator,
    tangent_basis,
    tangent_projector,
)
from .harmonics import QuadratureRule, real_harmonics, sphere_quadrature
from .orientation import (
    CurvatureField,
    OrientationDenoiser,
    OrientationGrid,
    SkewBasis,
    curvature_fd,
    curvature_from_smooth,
    embed_grid,
    ingest_grid,
    smooth_and_project,
    synthesize_grid,
    write_grid,
)
from .reach import estimate_reach
from .zoo import (
    CircleModel,
    ProjectiveModel,
    QuotientRotationModel,
    RotationModel,
    SphereModel,
    quotient_representative,
    so3_project,
)

__all__ = [name for name in dir() if not name.startswith("_")]
