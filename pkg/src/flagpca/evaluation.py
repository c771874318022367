"""Outlier-detection scoring: normalization, ROC/AUC and direction discrepancy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite, SingleClass


def normalize_scores(scores) -> np.ndarray:
    """Affine map onto [0, 1]; a constant input maps to all zeros."""
    s = np.asarray(scores, dtype=float).ravel()
    if s.size == 0:
        raise NonFinite("no scores to normalize")
    if not np.all(np.isfinite(s)):
        raise NonFinite("scores contain NaN or Inf")
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.zeros_like(s)
    return (s - lo) / (hi - lo)


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_auc(scores, labels) -> RocCurve:
    """ROC of "high score means outlier (label 1)".

    Thresholds sweep the distinct scores in decreasing order, so tied scores
    move both rates in a single step and the trapezoidal AUC equals the
    Mann-Whitney statistic.
    """
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel().astype(int)
    if s.shape != y.shape:
        raise DimensionMismatch(f"{s.size} scores but {y.size} labels")
    if not np.all(np.isin(y, (0, 1))):
        raise DimensionMismatch("labels must be 0 or 1")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("both inliers and outliers are needed for a ROC curve")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last_of_group]
    fp = np.cumsum(1 - y)[last_of_group]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, auc)


def direction_discrepancy(U, V) -> float:
    """Mean squared smallest angle between matching columns (sign-invariant)."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    U = U[:, None] if U.ndim == 1 else U
    V = V[:, None] if V.ndim == 1 else V
    if U.shape != V.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {V.shape} differ")
    cos = np.abs(np.sum(U * V, axis=0)) / (np.linalg.norm(U, axis=0) * np.linalg.norm(V, axis=0))
    theta = np.arccos(np.clip(cos, 0.0, 1.0))
    return float(np.mean(theta**2))


def total_reconstruction_error(X, U) -> float:
    X = np.asarray(X, dtype=float)
    U = np.asarray(U, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if U.ndim == 1:
        U = U[:, None]
    if X.shape[0] != U.shape[0]:
        raise DimensionMismatch(f"data dimension {X.shape[0]} != basis dimension {U.shape[0]}")
    return float(np.linalg.norm(X - U @ (U.T @ X), axis=0).sum())


def residual_scores(X, U) -> np.ndarray:
    """Per-sample Euclidean residuals ``||x_j - U U^T x_j||``."""
    X = np.asarray(X, dtype=float)
    return np.linalg.norm(X - U @ (U.T @ X), axis=0)


def dual_scores(X, B) -> np.ndarray:
    """Per-sample norms ``||B^T x_j||`` for dual directions ``B``."""
    return np.linalg.norm(np.asarray(B).T @ np.asarray(X, dtype=float), axis=0)
