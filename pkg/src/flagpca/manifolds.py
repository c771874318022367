"""Riemannian manifold backends and Karcher mean/median.

Points and tangent vectors are plain numpy arrays whose shape is the
manifold's ``shape``. Flattening is row-major.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BaseMismatch, CutLocus, DimensionMismatch, NoConvergenceWarning
from .flags import as_generator, qr_positive

POINT_TOL = 1e-10


class Manifold:
    kind: str = ""
    shape: tuple = ()
    dim: int = 0
    injectivity_radius: float = np.inf

    # -- geometry -----------------------------------------------------------
    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def dist(self, x, y) -> float:
        raise NotImplementedError

    def proj(self, x, v):
        """Orthogonal projection of an ambient array onto the tangent space at ``x``."""
        raise NotImplementedError

    def project_point(self, x):
        """Nearest point of the manifold (used to clean loaded data)."""
        raise NotImplementedError

    def point_defect(self, x) -> float:
        raise NotImplementedError

    def random_point(self, rng=None):
        raise NotImplementedError

    # -- shared helpers -----------------------------------------------------
    def _check(self, *arrays):
        out = []
        for a in arrays:
            a = np.asarray(a, dtype=float)
            if a.shape != self.shape:
                raise BaseMismatch(f"expected shape {self.shape}, got {a.shape}")
            out.append(a)
        return out if len(out) > 1 else out[0]

    def norm(self, v) -> float:
        return float(np.linalg.norm(np.asarray(v, dtype=float)))

    def check_point(self, x, tol: float = POINT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape == self.shape and self.point_defect(x) <= tol

    def random_tangent(self, x, rng=None, norm: float = 1.0):
        g = as_generator(rng).standard_normal(self.shape)
        v = self.proj(x, g)
        return v * (norm / np.linalg.norm(v))

    def log_batch(self, x, ys) -> np.ndarray:
        return np.stack([self.log(x, y) for y in ys])

    def flatten(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float).reshape(-1)

    def unflatten(self, x, w):
        w = np.asarray(w, dtype=float)
        if w.size != int(np.prod(self.shape)):
            raise DimensionMismatch(f"flat tangent has length {w.size}, expected {int(np.prod(self.shape))}")
        return self.proj(x, w.reshape(self.shape))

    @property
    def flat_dim(self) -> int:
        return int(np.prod(self.shape))

    def tangent_basis(self, x) -> np.ndarray:
        """Orthonormal basis (``flat_dim x dim``) of the flattened tangent space at ``x``."""
        eye = np.eye(self.flat_dim)
        P = np.stack([self.flatten(self.proj(x, e.reshape(self.shape))) for e in eye], axis=1)
        w, v = np.linalg.eigh(0.5 * (P + P.T))
        basis = v[:, w > 0.5]
        if basis.shape[1] != self.dim:
            raise DimensionMismatch(f"tangent space at x has dimension {basis.shape[1]}, expected {self.dim}")
        return basis[:, ::-1]

    def __eq__(self, other):
        return type(self) is type(other) and self.shape == other.shape

    def __hash__(self):
        return hash((type(self).__name__, self.shape))


class Euclidean(Manifold):
    kind = "euclidean"

    def __init__(self, n: int):
        if n < 1:
            raise DimensionMismatch("dimension must be positive")
        self.n = n
        self.shape = (n,)
        self.dim = n

    def exp(self, x, v):
        x, v = self._check(x, v)
        return x + v

    def log(self, x, y):
        x, y = self._check(x, y)
        return y - x

    def log_batch(self, x, ys):
        return np.asarray(ys, dtype=float) - self._check(x)

    def dist(self, x, y):
        x, y = self._check(x, y)
        return float(np.linalg.norm(y - x))

    def proj(self, x, v):
        return np.array(v, dtype=float).reshape(self.shape)

    def project_point(self, x):
        return np.asarray(x, dtype=float)

    def point_defect(self, x):
        return 0.0 if np.all(np.isfinite(x)) else np.inf

    def random_point(self, rng=None):
        return as_generator(rng).standard_normal(self.shape)

    def tangent_basis(self, x):
        return np.eye(self.n)

    def __repr__(self):
        return f"Euclidean({self.n})"


class _SphereLike(Manifold):
    """Unit sphere of the Frobenius norm inside a linear subspace."""

    injectivity_radius = np.pi

    def _subspace(self, v):
        return v

    def proj(self, x, v):
        v = self._subspace(np.array(v, dtype=float).reshape(self.shape))
        return v - np.sum(x * v) * x

    def project_point(self, x):
        x = self._subspace(np.array(x, dtype=float))
        return x / np.linalg.norm(x)

    def exp(self, x, v):
        x, v = self._check(x, v)
        t = np.linalg.norm(v)
        if t == 0.0:
            return x.copy()
        y = np.cos(t) * x + np.sin(t) * (v / t)
        return y / np.linalg.norm(y)

    def log(self, x, y):
        x, y = self._check(x, y)
        c = float(np.sum(x * y))
        w = y - c * x
        s = float(np.linalg.norm(w))
        if np.linalg.norm(x + y) < 1e-8:
            raise CutLocus("points are antipodal")
        if s == 0.0:
            return np.zeros_like(x)
        return np.arctan2(s, c) * (w / s)

    def log_batch(self, x, ys):
        x = self._check(x)
        ys = np.asarray(ys, dtype=float)
        axes = tuple(range(1, ys.ndim))
        c = np.sum(ys * x, axis=axes)
        w = ys - c.reshape((-1,) + (1,) * len(self.shape)) * x
        s = np.sqrt(np.sum(w * w, axis=axes))
        if np.any(np.sqrt(np.sum((ys + x) ** 2, axis=axes)) < 1e-8):
            raise CutLocus("a point is antipodal to the base point")
        scale = np.where(s > 0, np.arctan2(s, c) / np.where(s > 0, s, 1.0), 0.0)
        return w * scale.reshape((-1,) + (1,) * len(self.shape))

    def dist(self, x, y):
        x, y = self._check(x, y)
        c = float(np.sum(x * y))
        return float(np.arctan2(np.linalg.norm(y - c * x), c))

    def point_defect(self, x):
        x = np.asarray(x, dtype=float)
        return float(abs(np.linalg.norm(x) - 1.0))

    def random_point(self, rng=None):
        return self.project_point(as_generator(rng).standard_normal(self.shape))


class Sphere(_SphereLike):
    """Unit sphere S^n in R^(n+1)."""

    kind = "sphere"

    def __init__(self, n: int):
        if n < 1:
            raise DimensionMismatch("sphere dimension must be positive")
        self.n = n
        self.shape = (n + 1,)
        self.dim = n

    def __repr__(self):
        return f"Sphere({self.n})"


class PreShape(_SphereLike):
    """Kendall pre-shape space of ``m`` planar landmarks.

    Centered ``m x 2`` configurations of unit Frobenius norm: a sphere inside
    the centering subspace, so great-circle formulas are exact.
    """

    kind = "preshape2"

    def __init__(self, m: int):
        if m < 2:
            raise DimensionMismatch("need at least two landmarks")
        self.m = m
        self.shape = (m, 2)
        self.dim = 2 * m - 3

    def _subspace(self, v):
        return v - v.mean(axis=0, keepdims=True)

    def point_defect(self, x):
        x = np.asarray(x, dtype=float)
        return float(max(abs(np.linalg.norm(x) - 1.0), np.max(np.abs(x.sum(axis=0)))))

    def __repr__(self):
        return f"PreShape({self.m})"


class Grassmann(Manifold):
    """k-planes in R^n, represented by ``n x k`` orthonormal matrices."""

    kind = "grassmann"
    injectivity_radius = np.pi / 2

    def __init__(self, k: int, n: int):
        if not 1 <= k < n:
            raise DimensionMismatch(f"need 1 <= k < n, got k={k}, n={n}")
        self.k = k
        self.n = n
        self.shape = (n, k)
        self.dim = k * (n - k)

    def proj(self, x, v):
        v = np.array(v, dtype=float).reshape(self.shape)
        return v - x @ (x.T @ v)

    def project_point(self, x):
        return qr_positive(np.asarray(x, dtype=float))[0]

    def point_defect(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.max(np.abs(x.T @ x - np.eye(self.k))))

    def random_point(self, rng=None):
        return self.project_point(as_generator(rng).standard_normal(self.shape))

    def exp(self, x, v):
        x, v = self._check(x, v)
        if not np.any(v):
            return x.copy()
        P, s, Qt = np.linalg.svd(v, full_matrices=False)
        y = (x @ Qt.T) * np.cos(s) @ Qt + (P * np.sin(s)) @ Qt
        return qr_positive(y)[0]

    def _log_many(self, x, ys):
        B = np.swapaxes(ys, -1, -2) @ x  # (p, k, k) = (x^T y)^T
        if np.any(np.linalg.svd(B, compute_uv=False)[..., -1] < 1e-8):
            raise CutLocus("a principal angle reaches pi/2")
        A = ys - x @ (x.T @ ys)
        # M = A (x^T y)^{-1}  <=>  M^T = solve((x^T y)^T, A^T)
        M = np.swapaxes(np.linalg.solve(B, np.swapaxes(A, -1, -2)), -1, -2)
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        return (U * np.arctan(s)[..., None, :]) @ Vt

    def log(self, x, y):
        x, y = self._check(x, y)
        return self._log_many(x, y[None])[0]

    def log_batch(self, x, ys):
        return self._log_many(self._check(x), np.asarray(ys, dtype=float))

    def principal_angles(self, x, y) -> np.ndarray:
        x, y = self._check(x, y)
        cos = np.clip(np.linalg.svd(x.T @ y, compute_uv=False), -1.0, 1.0)
        sin = np.clip(np.sort(np.linalg.svd(y - x @ (x.T @ y), compute_uv=False)), 0.0, 1.0)
        return np.arctan2(sin, cos)

    def dist(self, x, y):
        return float(np.linalg.norm(self.principal_angles(x, y)))

    def __repr__(self):
        return f"Grassmann({self.k}, {self.n})"


# -- Karcher statistics -------------------------------------------------------


@dataclass(frozen=True)
class MeanOptions:
    max_iters: int = 1000
    tol: float = 1e-8
    step: float = 0.05
    median_eps: float = 1e-10

    def __post_init__(self):
        if min(self.max_iters, self.tol, self.step, self.median_eps) <= 0:
            raise ValueError("MeanOptions values must be positive")


@dataclass
class KarcherInfo:
    iterations: int
    converged: bool
    gradient_norm: float


def _as_points(M: Manifold, points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == len(M.shape):
        pts = pts[None]
    if pts.shape[1:] != M.shape or pts.shape[0] == 0:
        raise BaseMismatch(f"points must have shape (p,) + {M.shape}")
    return pts


def _finish(mu, info, full_output, what):
    if not info.converged:
        warnings.warn(f"Karcher {what} stopped after {info.iterations} iterations "
                      f"(gradient norm {info.gradient_norm:.2e})", NoConvergenceWarning)
    return (mu, info) if full_output else mu


def karcher_mean(M: Manifold, points, opts: MeanOptions | None = None, full_output: bool = False):
    """Gradient descent on the sum of squared geodesic distances, started at the first point."""
    opts = opts or MeanOptions()
    pts = _as_points(M, points)
    if isinstance(M, Euclidean):
        return _finish(pts.mean(axis=0), KarcherInfo(1, True, 0.0), full_output, "mean")
    mu = pts[0].copy()
    gnorm = np.inf
    for it in range(opts.max_iters + 1):
        g = M.log_batch(mu, pts).mean(axis=0)
        gnorm = M.norm(g)
        if gnorm < opts.tol:
            return _finish(mu, KarcherInfo(it, True, gnorm), full_output, "mean")
        if it == opts.max_iters:
            break
        mu = M.exp(mu, opts.step * g)
    return _finish(mu, KarcherInfo(opts.max_iters, False, gnorm), full_output, "mean")


def karcher_median(M: Manifold, points, opts: MeanOptions | None = None, full_output: bool = False):
    """Damped Weiszfeld iteration for the geometric median, started at the Karcher mean."""
    opts = opts or MeanOptions()
    pts = _as_points(M, points)
    if len(pts) == 1:
        return _finish(pts[0].copy(), KarcherInfo(0, True, 0.0), full_output, "median")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergenceWarning)
        mu = karcher_mean(M, pts, opts)
    axes = tuple(range(1, pts.ndim))
    gnorm = np.inf
    for it in range(opts.max_iters + 1):
        logs = M.log_batch(mu, pts)
        d = np.sqrt(np.sum(logs * logs, axis=axes))
        w = 1.0 / np.maximum(d, opts.median_eps)
        g = np.tensordot(w, logs, axes=1) / w.sum()
        gnorm = M.norm(g)
        if gnorm < opts.tol:
            return _finish(mu, KarcherInfo(it, True, gnorm), full_output, "median")
        if it == opts.max_iters:
            break
        mu = M.exp(mu, opts.step * g)
    return _finish(mu, KarcherInfo(opts.max_iters, False, gnorm), full_output, "median")
