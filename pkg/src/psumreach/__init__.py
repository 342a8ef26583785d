"""Tight outer ellipsoids for p-sums of ellipsoids, with reach-set tooling.

The library computes minimum-trace and minimum-volume outer ellipsoidal
approximations of p-sums (support-function power means) of ellipsoids, folds
them through discrete-time linear dynamics into reach tubes, and checks the
results against sampling-based containment and enclosing-ellipsoid oracles.
"""

from .errors import (
    DegenerateImage,
    DegeneratePointSet,
    DimensionMismatch,
    InvalidBeta,
    InvalidP,
    NoConvergence,
    NotOuter,
    NotPositiveDefinite,
    PSumReachError,
    UnsupportedP,
)
from .geometry import (
    Ellipsoid,
    MinkowskiExpression,
    PSumSet,
    QuadraticForm,
    from_quadratic_form,
    linear_map,
    support_ellipsoid,
    support_point,
    support_psum,
    to_quadratic_form,
    volume,
)
from .linalg import (
    cholesky,
    gen_eigenvalues,
    spd_det,
    spd_inverse,
    spd_sqrt,
    spectral_norm,
    symmetrize,
)
from .metrics import SphereSampler, hausdorff_sampled, hausdorff_upper_bound, report
from .oracle import (
    ContainmentReport,
    check_containment,
    grid_beta_argmin,
    mvee_khachiyan,
    psum_mvee_reference,
)
from .outer import (
    Criterion,
    FixedPointConfig,
    OuterResult,
    beta_trace_opt,
    beta_volume_opt,
    fixed_point_step,
    foc_residual,
    fold_minkowski_outer,
    fold_psum_outer,
    pair_outer,
    q_beta,
)
from .reach import (
    LtiSystem,
    ReachStep,
    ReachTube,
    UncertaintyModel,
    propagate_blocks,
    reach_support,
    reach_tube,
)

__version__ = "0.1.0"

__all__ = [
    "PSumReachError", "NotPositiveDefinite", "DimensionMismatch", "InvalidP",
    "InvalidBeta", "NoConvergence", "DegenerateImage", "UnsupportedP",
    "DegeneratePointSet", "NotOuter",
    "symmetrize", "cholesky", "spd_det", "spd_inverse", "gen_eigenvalues",
    "spd_sqrt", "spectral_norm",
    "Ellipsoid", "QuadraticForm", "PSumSet", "MinkowskiExpression",
    "support_ellipsoid", "support_psum", "support_point", "volume",
    "to_quadratic_form", "from_quadratic_form", "linear_map",
    "Criterion", "FixedPointConfig", "OuterResult", "q_beta",
    "beta_trace_opt", "foc_residual", "fixed_point_step", "beta_volume_opt",
    "pair_outer", "fold_psum_outer", "fold_minkowski_outer",
    "LtiSystem", "UncertaintyModel", "ReachStep", "ReachTube",
    "propagate_blocks", "reach_tube", "reach_support",
    "SphereSampler", "hausdorff_sampled", "hausdorff_upper_bound", "report",
    "ContainmentReport", "grid_beta_argmin", "check_containment",
    "mvee_khachiyan", "psum_mvee_reference",
]
