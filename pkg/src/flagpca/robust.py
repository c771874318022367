"""Flagified robust and dual principal directions by iterative reweighting.

Four estimators share one loop: recompute per-block weights from the current
flag, then solve a weighted subproblem on the Stiefel manifold.

    FRPCA   maximize  sum_j sum_i ||U_i U_i^T x_j||
    FWPCA   minimize  sum_j sum_i ||x_j - U_i U_i^T x_j||
    FDPCP   minimize  sum_j sum_i ||U_i U_i^T x_j||
    FWDPCP  maximize  sum_j sum_i ||x_j - U_i U_i^T x_j||
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import BadDims, DimensionMismatch
from .flags import (
    FlagPoint,
    FlagType,
    block_selectors,
    chordal_distance,
    random_flag,
    svd_init_flag,
)
from .stiefel import CgdOptions, Sense, procrustes_maximize, solve_weighted_fpca


class Variant(str, enum.Enum):
    FRPCA = "frpca"
    FWPCA = "fwpca"
    FDPCP = "fdpcp"
    FWDPCP = "fwdpcp"

    @property
    def is_dual(self) -> bool:
        return self in (Variant.FDPCP, Variant.FWDPCP)

    @property
    def uses_residuals(self) -> bool:
        return self in (Variant.FWPCA, Variant.FWDPCP)

    @property
    def maximizes(self) -> bool:
        return self in (Variant.FRPCA, Variant.FWDPCP)


# Variants whose update is a majorize-minimize step, so the true objective
# cannot get worse (up to the eps clamp).
_MONOTONE = (Variant.FRPCA, Variant.FWPCA, Variant.FDPCP)


@dataclass(frozen=True)
class FitOptions:
    max_iters: int = 50
    obj_tol: float = 1e-9
    flag_tol: float = 1e-9
    eps_clamp: float = 1e-8
    init: Union[str, FlagPoint] = "random"  # "random", "svd" or an explicit FlagPoint
    seed: int | None = 0
    inner: CgdOptions = field(default_factory=CgdOptions)
    restarts: int = 1  # extra starts are random; the best final objective wins

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if min(self.obj_tol, self.flag_tol, self.eps_clamp) <= 0:
            raise ValueError("tolerances and eps_clamp must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if isinstance(self.init, str) and self.init not in ("random", "svd"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class FitResult:
    directions: FlagPoint
    objective_trace: list
    iterations: int
    converged: bool
    variant: Variant
    stop_reason: str = ""

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _as_data(F: FlagPoint, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != F.ftype.ambient:
        raise DimensionMismatch(f"data shape {X.shape} incompatible with {F.ftype}")
    return X


def block_projection_norms(F: FlagPoint, X) -> np.ndarray:
    """``(k, p)`` array of ``||U_i U_i^T x_j||``."""
    X = _as_data(F, X)
    return np.stack([np.linalg.norm(Ui.T @ X, axis=0) for Ui in F.blocks()])


def block_residual_norms(F: FlagPoint, X) -> np.ndarray:
    """``(k, p)`` array of ``||x_j - U_i U_i^T x_j||``."""
    X = _as_data(F, X)
    return np.stack([np.linalg.norm(X - Ui @ (Ui.T @ X), axis=0) for Ui in F.blocks()])


def weights_plus(F: FlagPoint, X, eps: float = 1e-8) -> np.ndarray:
    return 1.0 / np.maximum(block_projection_norms(F, X), eps)


def weights_minus(F: FlagPoint, X, eps: float = 1e-8) -> np.ndarray:
    return 1.0 / np.maximum(block_residual_norms(F, X), eps)


def robust_objective(variant: Variant, F: FlagPoint, X) -> float:
    """Sum over samples (not the mean) of the per-block norms."""
    variant = Variant(variant)
    norms = block_residual_norms(F, X) if variant.uses_residuals else block_projection_norms(F, X)
    return float(norms.sum())


def _initial_flag(X, ft: FlagType, opts: FitOptions) -> FlagPoint:
    if isinstance(opts.init, FlagPoint):
        if opts.init.ftype != ft:
            raise DimensionMismatch(f"explicit init has type {opts.init.ftype}, expected {ft}")
        return opts.init
    if opts.init == "svd":
        return svd_init_flag(X, ft)
    return random_flag(ft, opts.seed)


def _procrustes_step(F: FlagPoint, X, W) -> np.ndarray:
    # rows of block i: U_i^T X W_i X^T
    A = np.vstack([Ui.T @ (X * w) @ X.T for Ui, w in zip(F.blocks(), W)])
    return procrustes_maximize(A)


def _update(variant: Variant, F: FlagPoint, X, opts: FitOptions) -> FlagPoint:
    ft = F.ftype
    if variant.uses_residuals:
        W = weights_minus(F, X, opts.eps_clamp)
    else:
        W = weights_plus(F, X, opts.eps_clamp)
    if variant in (Variant.FRPCA, Variant.FWPCA):
        return FlagPoint(_procrustes_step(F, X, W), ft, tol=1e-9)
    # both dual variants shrink the weighted projection trace
    return solve_weighted_fpca(X, W, ft, F, Sense.MINIMIZE, opts.inner)


def fit(variant: Variant, X, ft: FlagType, opts: FitOptions | None = None) -> FitResult:
    """Iteratively reweighted flag estimation.

    Stops when the objective changes by less than ``obj_tol``, when the flag
    moves by less than ``flag_tol`` in chordal distance, or after
    ``max_iters`` updates. For the majorize-minimize variants a step that
    worsens the true objective is rejected and ends the run.

    With ``opts.restarts > 1`` the first run starts from ``opts.init`` and the
    others from random flags drawn from seeds spawned off ``opts.seed``; the
    run with the best final objective is returned.
    """
    variant = Variant(variant)
    opts = opts or FitOptions()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != ft.ambient:
        raise DimensionMismatch(f"data shape {X.shape} incompatible with {ft}")
    if X.shape[1] < 1:
        raise DimensionMismatch("empty dataset")
    if np.linalg.matrix_rank(X) < ft.nk:
        warnings.warn(f"data rank is below {ft.nk}; null directions are resolved arbitrarily")

    best = _run(variant, X, _initial_flag(X, ft, opts), opts)
    if opts.restarts > 1:
        children = np.random.SeedSequence(opts.seed).spawn(opts.restarts - 1)
        for child in children:
            res = _run(variant, X, random_flag(ft, np.random.default_rng(child)), opts)
            better = res.objective > best.objective if variant.maximizes else res.objective < best.objective
            if better:
                best = res
    return best


def _run(variant: Variant, X, F: FlagPoint, opts: FitOptions) -> FitResult:
    f = robust_objective(variant, F, X)
    trace = [f]
    converged = False
    reason = "max_iters"
    sense = 1.0 if variant.maximizes else -1.0
    for _ in range(opts.max_iters):
        F_new = _update(variant, F, X, opts)
        f_new = robust_objective(variant, F_new, X)
        if variant in _MONOTONE and sense * (f_new - f) < 0:
            converged, reason = True, "no_improvement"
            break
        moved = chordal_distance(F, F_new)
        F, f_old, f = F_new, f, f_new
        trace.append(f)
        if abs(f_old - f) < opts.obj_tol:
            converged, reason = True, "objective"
            break
        if moved < opts.flag_tol:
            converged, reason = True, "flag"
            break
    return FitResult(F, trace, len(trace) - 1, converged, variant, reason)


_NAMED = {
    "RPCA": Variant.FRPCA,
    "WPCA": Variant.FWPCA,
    "DPCP": Variant.FDPCP,
    "WDPCP": Variant.FWDPCP,
}


def named_variant(name: str, k: int, n: int) -> tuple[Variant, FlagType]:
    """Map ``L1_RPCA``-style names to a variant and flag signature.

    ``L1_*`` uses the full signature ``(1, 2, ..., k; n)`` and ``L2_*`` the
    Grassmannian ``(k; n)``. Hyphens are accepted in place of underscores.
    """
    key = name.upper().replace("-", "_")
    norm, _, family = key.partition("_")
    if norm not in ("L1", "L2") or family not in _NAMED:
        raise BadDims(f"unknown variant name {name!r}")
    if not 1 <= k < n:
        raise BadDims(f"need 1 <= k < n, got k={k}, n={n}")
    dims = tuple(range(1, k + 1)) if norm == "L1" else (k,)
    return _NAMED[family], FlagType(dims, n)

