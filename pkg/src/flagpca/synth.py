"""Seeded generators for the synthetic experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShape, DimensionMismatch
from .flags import as_generator
from .manifolds import Grassmann, Manifold, PreShape, Sphere


@dataclass
class LabeledDataset:
    points: np.ndarray  # (p,) + manifold.shape
    labels: np.ndarray  # 0 inlier, 1 outlier
    manifold: Manifold
    seed: int | None


def gen_uniform_cube(p: int, n: int, seed=None) -> np.ndarray:
    """``n x p`` matrix of i.i.d. U[0, 1) entries, not centered."""
    if p < 1 or n < 1:
        raise DimensionMismatch("p and n must be positive")
    return as_generator(seed).random((n, p))


def gen_sphere4(seed=None, n_in: int = 100, n_out: int = 20) -> LabeledDataset:
    """Inliers and outliers wrapped around a random center of S^4."""
    rng = as_generator(seed)
    S = Sphere(4)
    center = S.random_point(rng)
    inl = rng.uniform(0.0, 0.01, (n_in, 5))
    out = np.hstack([rng.uniform(0.0, 0.01, (n_out, 2)), rng.uniform(0.0, 0.1, (n_out, 3))])
    pts = [S.exp(center, S.proj(center, v)) for v in np.vstack([inl, out])]
    labels = np.r_[np.zeros(n_in, int), np.ones(n_out, int)]
    return LabeledDataset(np.array(pts), labels, S, seed)


def gen_grassmann24(n_in: int = 100, n_out: int = 20, seed=None) -> LabeledDataset:
    """Inliers along two geodesics through [X]; outliers scattered close to [Y]."""
    if n_in < 0 or n_out < 0:
        raise DimensionMismatch("counts must be nonnegative")
    rng = as_generator(seed)
    G = Grassmann(2, 4)
    X, Y = G.random_point(rng), G.random_point(rng)
    V = [G.random_tangent(X, rng), G.random_tangent(X, rng)]
    pts = []
    for _ in range(n_in):
        a = rng.random()
        pts.append(G.exp(X, a * V[rng.integers(2)]))
    for _ in range(n_out):
        b = rng.uniform(0.0, 0.1)
        pts.append(G.exp(Y, b * G.random_tangent(Y, rng)))
    labels = np.r_[np.zeros(n_in, int), np.ones(n_out, int)]
    return LabeledDataset(np.array(pts).reshape((-1,) + G.shape), labels, G, seed)


CLUSTER_COORDS = ((0, 1), (2, 3, 4), (5, 6))


def gen_clusters(seed=None, per_cluster: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Three clusters in R^10 living mostly in coordinates 1-2, 3-5 and 6-7.

    Returns the ``10 x 300`` data matrix and cluster labels in {1, 2, 3}.
    """
    rng = as_generator(seed)
    blocks = []
    for idx in CLUSTER_COORDS:
        B = rng.uniform(0.0, 0.1, (10, per_cluster))
        B[list(idx)] = rng.uniform(0.0, 1.0, (len(idx), per_cluster))
        blocks.append(B)
    labels = np.repeat(np.arange(1, len(CLUSTER_COORDS) + 1), per_cluster)
    return np.hstack(blocks), labels


HOLE_FRACTION = 0.068


def _ellipse(m: int, rng) -> np.ndarray:
    for _ in range(100):
        a, b = rng.normal(0.4, 0.5, 2)
        if a > 0 and b > 0:
            break
    else:
        raise DegenerateShape("could not sample positive ellipse axes in 100 attempts")
    center = rng.normal(0.0, 0.1, 2)
    start = rng.uniform(0.0, 2 * np.pi)
    theta = start + np.linspace(0.0, (1.0 - HOLE_FRACTION) * 2 * np.pi, m)
    return np.column_stack([a * np.cos(theta), b * np.sin(theta)]) + center


def _hairball(m: int, rng) -> np.ndarray:
    return rng.normal(0.0, 10.0, (m, 2))


def gen_preshape_outliers(kind: str, count: int, m: int = 56, seed=None) -> np.ndarray:
    """Open ellipses or Gaussian "hairballs" projected onto the pre-shape space.

    Returns an array of shape ``(count, m, 2)``.
    """
    if m < 3:
        raise DimensionMismatch("need at least 3 landmarks")
    kind = kind.lower()
    if kind not in ("ellipse", "hairball"):
        raise ValueError(f"unknown outlier kind {kind!r}")
    rng = as_generator(seed)
    P = PreShape(m)
    out = []
    for _ in range(count):
        raw = _ellipse(m, rng) if kind == "ellipse" else _hairball(m, rng)
        out.append(P.project_point(raw))
    return np.array(out).reshape((count, m, 2))
