"""Stiefel-manifold optimization and the weighted flag-PCA subproblems.

The weighted flag objective is

    f(U) = sum_i tr(U^T X W_i X^T U I_i) = sum_i sum_j w_ij ||U_i^T x_j||^2

where ``U_i`` are the column blocks of the flag representative. Weights are
passed as a ``(k, p)`` array whose row ``i`` is the diagonal of ``W_i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatch, NonFinite, RankCollapse
from .flags import FlagPoint, FlagType, block_selectors, qr_positive


class Sense(str, enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


@dataclass(frozen=True)
class CgdOptions:
    max_iters: int = 200
    grad_tol: float = 1e-8
    step_shrink: float = 0.5
    armijo_c: float = 1e-4
    restart_period: Optional[int] = None  # None: dimension of St(q, n)
    step_growth: float = 2.0
    min_step: float = 1e-16

    def __post_init__(self):
        if self.max_iters < 0 or self.grad_tol <= 0 or self.armijo_c <= 0:
            raise ValueError("CgdOptions values must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.restart_period is not None and self.restart_period < 1:
            raise ValueError("restart_period must be positive")


@dataclass(frozen=True)
class SmoothObjective:
    value: Callable[[np.ndarray], float]
    euclidean_gradient: Callable[[np.ndarray], np.ndarray]
    sense: Sense = Sense.MINIMIZE


class CgdResult(NamedTuple):
    point: np.ndarray
    value: float
    iterations: int
    converged: bool
    line_search_failed: bool
    values: list


def _sym(a):
    return 0.5 * (a + a.T)


def tangent_project(U, G) -> np.ndarray:
    """Project ``G`` onto the tangent space of the Stiefel manifold at ``U``."""
    U = np.asarray(U, dtype=float)
    G = np.asarray(G, dtype=float)
    if U.shape != G.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {G.shape} differ")
    return G - U @ _sym(U.T @ G)


def qr_retract(U, delta) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if U.shape != delta.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {delta.shape} differ")
    y = U + delta
    if not np.all(np.isfinite(y)):
        raise RankCollapse("non-finite retraction input")
    q, r = qr_positive(y)
    d = np.abs(np.diag(r))
    if d.size and d.min() <= 1e-12 * max(d.max(), 1.0):
        raise RankCollapse("U + delta is rank deficient")
    return q


def _resolve(U, ft):
    if isinstance(U, FlagPoint):
        return U.rep, U.ftype
    if ft is None:
        raise TypeError("a FlagType is required when U is a plain array")
    return np.asarray(U, dtype=float), ft


def check_weights(W, k: int, p: int) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.ndim == 1 and k == 1:
        W = W[None, :]
    if W.shape != (k, p):
        raise DimensionMismatch(f"weights have shape {W.shape}, expected {(k, p)}")
    if not np.all(np.isfinite(W)) or np.any(W < 0):
        raise NonFinite("weights must be finite and nonnegative")
    return W


def _check_data(U, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != U.shape[0]:
        raise DimensionMismatch(f"data dimension {X.shape[0]} != ambient {U.shape[0]}")
    return X


def weighted_flag_objective(U, X, W, ft: FlagType | None = None) -> float:
    U, ft = _resolve(U, ft)
    X = _check_data(U, X)
    W = check_weights(W, ft.k, X.shape[1])
    total = 0.0
    for sel, w in zip(block_selectors(ft), W):
        coef = U[:, sel.slice].T @ X
        total += float(np.sum(w * np.sum(coef**2, axis=0)))
    return total


def weighted_flag_gradient(U, X, W, ft: FlagType | None = None) -> np.ndarray:
    """Euclidean gradient ``2 sum_i X W_i X^T U I_i`` of the weighted objective."""
    U, ft = _resolve(U, ft)
    X = _check_data(U, X)
    W = check_weights(W, ft.k, X.shape[1])
    G = np.zeros_like(U)
    for sel, w in zip(block_selectors(ft), W):
        G[:, sel.slice] = 2.0 * X @ (w[:, None] * (X.T @ U[:, sel.slice]))
    return G


def procrustes_maximize(A) -> np.ndarray:
    """Column-orthonormal ``Z`` (n x q) maximizing ``tr(A Z)`` for ``A`` of shape q x n."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all(np.isfinite(A)):
        raise NonFinite("Procrustes input contains NaN or Inf")
    P, _, Qt = np.linalg.svd(A.T, full_matrices=False)
    return P @ Qt


def _stiefel_dim(n, q):
    return n * q - q * (q + 1) // 2


def cgd_solve(obj: SmoothObjective, init, opts: CgdOptions | None = None) -> CgdResult:
    """Riemannian conjugate gradients on the Stiefel manifold.

    Polak-Ribiere+ directions, projection transport, Armijo backtracking
    along the QR retraction. The returned value sequence is monotone in the
    declared sense.
    """
    opts = opts or CgdOptions()
    sign = -1.0 if obj.sense == Sense.MAXIMIZE else 1.0
    U = np.array(init, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    n, q = U.shape
    restart = opts.restart_period or max(_stiefel_dim(n, q), 1)

    def f(V):
        return sign * obj.value(V)

    def rgrad(V):
        return tangent_project(V, sign * obj.euclidean_gradient(V))

    fu = f(U)
    g = rgrad(U)
    gsq = float(np.sum(g * g))
    values = [sign * fu]
    if np.sqrt(gsq) < opts.grad_tol:
        return CgdResult(U, sign * fu, 0, True, False, values)

    d = -g
    step = 1.0
    since_restart = 0
    failed = False
    converged = False
    it = 0
    while it < opts.max_iters:
        slope = float(np.sum(g * d))
        if slope >= 0:
            d = -g
            slope = -gsq
            since_restart = 0
        t = step
        while True:
            try:
                cand = qr_retract(U, t * d)
                fc = f(cand)
            except RankCollapse:
                fc = np.inf
            if fc <= fu + opts.armijo_c * t * slope:
                break
            t *= opts.step_shrink
            if t < opts.min_step:
                failed = True
                break
        if failed:
            break
        it += 1
        U, fu = cand, fc
        values.append(sign * fu)
        step = t * opts.step_growth

        g_new = rgrad(U)
        gsq_new = float(np.sum(g_new * g_new))
        if np.sqrt(gsq_new) < opts.grad_tol:
            converged = True
            g, gsq = g_new, gsq_new
            break
        d_old = tangent_project(U, d)
        g_old = tangent_project(U, g)
        beta = max(0.0, float(np.sum(g_new * (g_new - g_old))) / gsq)
        since_restart += 1
        if since_restart >= restart:
            beta = 0.0
            since_restart = 0
        d = -g_new + beta * d_old
        g, gsq = g_new, gsq_new

    return CgdResult(U, sign * fu, it, converged, failed, values)


def solve_weighted_fpca(
    X,
    W,
    ft: FlagType,
    init: FlagPoint,
    sense: Sense = Sense.MAXIMIZE,
    opts: CgdOptions | None = None,
    full_output: bool = False,
):
    """Weighted flag PCA (maximize) or weighted flag orthogonal PCA (minimize).

    Warm-starts from ``init``; returns the flag spanned by the CGD solution.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != ft.ambient:
        raise DimensionMismatch(f"data shape {X.shape} incompatible with {ft}")
    if init.ftype != ft:
        raise DimensionMismatch(f"init has type {init.ftype}, expected {ft}")
    W = check_weights(W, ft.k, X.shape[1])
    sels = block_selectors(ft)
    # per-block weighted scatter matrices; n is small relative to p in every use
    scatters = [X @ (w[:, None] * X.T) for w in W]

    def value(U):
        return float(sum(np.sum(U[:, s.slice] * (C @ U[:, s.slice])) for s, C in zip(sels, scatters)))

    def grad(U):
        G = np.empty_like(U)
        for s, C in zip(sels, scatters):
            G[:, s.slice] = 2.0 * C @ U[:, s.slice]
        return G

    res = cgd_solve(SmoothObjective(value, grad, Sense(sense)), init.rep, opts)
    flag = FlagPoint(res.point, ft, tol=1e-9)
    return (flag, res) if full_output else flag
