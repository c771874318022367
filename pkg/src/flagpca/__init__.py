"""Robust and dual principal directions on flag manifolds."""

from .errors import *  # noqa: F401,F403
from .evaluation import (
    RocCurve,
    direction_discrepancy,
    normalize_scores,
    roc_auc,
    total_reconstruction_error,
)
from .flags import (
    BlockSelector,
    FlagPoint,
    FlagType,
    block_selectors,
    chordal_distance,
    eigen_flag,
    make_flag_type,
    project_block,
    random_flag,
    svd_init_flag,
)
from .manifolds import (
    Euclidean,
    Grassmann,
    Manifold,
    MeanOptions,
    PreShape,
    Sphere,
    karcher_mean,
    karcher_median,
)
from .robust import (
    FitOptions,
    FitResult,
    Variant,
    fit,
    named_variant,
    robust_objective,
    weights_minus,
    weights_plus,
)
from .stiefel import (
    CgdOptions,
    Sense,
    SmoothObjective,
    cgd_solve,
    procrustes_maximize,
    qr_retract,
    solve_weighted_fpca,
    weighted_flag_gradient,
    weighted_flag_objective,
)
from .tangent import PLAIN_TPCA, TangentFitResult, fit_tangent, reconstruct, score_dual, score_points, score_primal

__version__ = "0.1.0"
