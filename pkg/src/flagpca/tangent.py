"""Flagified principal directions in the tangent space of a manifold centroid.

Data are centered at a Karcher median (robust variants) or mean (plain
tangent PCA), log-mapped and flattened. The Euclidean estimator then runs in
an orthonormal basis of the tangent space, and the resulting directions are
expressed back in flattened tangent coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, WrongVariant
from .flags import FlagPoint, FlagType, random_flag, svd_init_flag
from .manifolds import Manifold, MeanOptions, karcher_mean, karcher_median
from .robust import FitOptions, FitResult, Variant, fit
from .stiefel import CgdResult, Sense, solve_weighted_fpca

PLAIN_TPCA = "tpca"


@dataclass
class TangentFitResult:
    base: np.ndarray
    flag: FlagPoint  # directions in flattened tangent coordinates
    variant: Union[Variant, str]
    manifold: Manifold
    inner: Union[FitResult, CgdResult, None] = None

    @property
    def is_dual(self) -> bool:
        return isinstance(self.variant, Variant) and self.variant.is_dual


def _variant(variant):
    if isinstance(variant, str) and variant.lower() == PLAIN_TPCA:
        return PLAIN_TPCA
    return Variant(variant)


def _dims(ft, M: Manifold) -> tuple[int, ...]:
    if isinstance(ft, FlagType):
        if ft.ambient not in (M.flat_dim, M.dim):
            raise DimensionMismatch(f"flag ambient {ft.ambient} matches neither the flat ({M.flat_dim}) "
                                    f"nor the intrinsic ({M.dim}) tangent dimension")
        return ft.dims
    return tuple(int(d) for d in ft)


def tangent_data(M: Manifold, base, points) -> np.ndarray:
    """Flattened log-mapped points as columns of a ``flat_dim x p`` matrix."""
    logs = M.log_batch(base, np.asarray(points, dtype=float))
    return logs.reshape(len(logs), -1).T


def fit_tangent(
    variant,
    M: Manifold,
    points,
    ft: Union[FlagType, Sequence[int]],
    opts: FitOptions | None = None,
    mean_opts: MeanOptions | None = None,
) -> TangentFitResult:
    """Tangent PCA (``"tpca"``) or a flagified robust/dual variant on manifold data.

    ``ft`` gives the signature; its ambient dimension, when a FlagType is
    passed, may be either the flattened or the intrinsic tangent dimension.
    """
    variant = _variant(variant)
    opts = opts or FitOptions()
    pts = np.asarray(points, dtype=float)
    if pts.ndim == len(M.shape):
        pts = pts[None]
    if len(pts) == 0:
        raise DimensionMismatch("empty dataset")
    dims = _dims(ft, M)
    if len(pts) < dims[-1]:
        raise DimensionMismatch(f"need at least {dims[-1]} points, got {len(pts)}")

    if variant == PLAIN_TPCA:
        base = karcher_mean(M, pts, mean_opts)
    else:
        base = karcher_median(M, pts, mean_opts)
    V = tangent_data(M, base, pts)
    Q = M.tangent_basis(base)
    C = Q.T @ V
    inner_ft = FlagType(dims, M.dim)

    if variant == PLAIN_TPCA:
        if isinstance(opts.init, FlagPoint):
            init = FlagPoint(Q.T @ opts.init.rep, inner_ft, tol=1e-8)
        elif opts.init == "svd":
            init = svd_init_flag(C, inner_ft)
        else:
            init = random_flag(inner_ft, opts.seed)
        W = np.ones((inner_ft.k, C.shape[1]))
        F, inner = solve_weighted_fpca(C, W, inner_ft, init, Sense.MAXIMIZE, opts.inner, full_output=True)
    else:
        if isinstance(opts.init, FlagPoint):
            init = FlagPoint(Q.T @ opts.init.rep, inner_ft, tol=1e-8)
            opts = replace(opts, init=init)
        inner = fit(variant, C, inner_ft, opts)
        F = inner.directions
    flag = FlagPoint(Q @ F.rep, FlagType(dims, M.flat_dim), tol=1e-9)
    return TangentFitResult(base, flag, variant, M, inner)


def project_tangent(fit_: TangentFitResult, x) -> np.ndarray:
    M, U = fit_.manifold, fit_.flag.rep
    w = M.flatten(M.log(fit_.base, x))
    return M.unflatten(fit_.base, U @ (U.T @ w))


def reconstruct(fit_: TangentFitResult, x) -> np.ndarray:
    """Project the log-mapped point onto the principal directions and map back with Exp."""
    return fit_.manifold.exp(fit_.base, project_tangent(fit_, x))


def score_primal(fit_: TangentFitResult, x) -> float:
    """Geodesic distance between a point and its reconstruction."""
    return fit_.manifold.dist(x, reconstruct(fit_, x))


def score_dual(fit_: TangentFitResult, x) -> float:
    """Norm of the tangent vector's coordinates along the dual directions."""
    if not fit_.is_dual:
        raise WrongVariant(f"dual scores need a dual variant fit, got {fit_.variant}")
    M = fit_.manifold
    w = M.flatten(M.log(fit_.base, x))
    return float(np.linalg.norm(fit_.flag.rep.T @ w))


def score_points(fit_: TangentFitResult, points, mode: str = "primal") -> np.ndarray:
    scorer = {"primal": score_primal, "dual": score_dual}[mode]
    return np.array([scorer(fit_, x) for x in np.asarray(points, dtype=float)])
