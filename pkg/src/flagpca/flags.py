"""Flag manifold representations.

A flag of type ``(n_1, ..., n_k; n)`` is stored by a Stiefel representative,
an ``n x n_k`` matrix with orthonormal columns. Columns ``n_{i-1}:n_i`` span
the i-th block; the nested subspaces are the spans of the leading blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AmbientTooSmall,
    DimensionMismatch,
    NonIncreasingSignature,
    RankDeficient,
    TypeMismatch,
)

ORTHO_TOL = 1e-10


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def qr_positive(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR with the sign convention diag(R) >= 0."""
    q, r = np.linalg.qr(a)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


@dataclass(frozen=True)
class FlagType:
    """Signature ``(n_1 < ... < n_k; n)`` of a flag manifold."""

    dims: tuple[int, ...]
    ambient: int

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "ambient", int(self.ambient))
        if not dims:
            raise NonIncreasingSignature("flag signature must be non-empty")
        if dims[0] < 1 or any(b <= a for a, b in zip(dims, dims[1:])):
            raise NonIncreasingSignature(f"signature {dims} is not strictly increasing and positive")
        if dims[-1] >= self.ambient:
            raise AmbientTooSmall(f"last dimension {dims[-1]} must be < ambient {self.ambient}")

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def nk(self) -> int:
        return self.dims[-1]

    @property
    def block_sizes(self) -> tuple[int, ...]:
        prev = (0,) + self.dims[:-1]
        return tuple(b - a for a, b in zip(prev, self.dims))

    def __str__(self):
        return f"({','.join(map(str, self.dims))};{self.ambient})"


def make_flag_type(dims: Sequence[int], ambient: int) -> FlagType:
    return FlagType(tuple(dims), ambient)


@dataclass(frozen=True)
class BlockSelector:
    """Columns ``[start, stop)`` of block ``block_index`` (1-based)."""

    block_index: int
    start: int
    stop: int

    @property
    def column_range(self) -> range:
        return range(self.start, self.stop)

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)

    def mask(self, nk: int) -> np.ndarray:
        """The diagonal 0/1 matrix selecting this block."""
        d = np.zeros(nk)
        d[self.start:self.stop] = 1.0
        return np.diag(d)


def block_selectors(ft: FlagType) -> list[BlockSelector]:
    starts = (0,) + ft.dims[:-1]
    return [BlockSelector(i + 1, a, b) for i, (a, b) in enumerate(zip(starts, ft.dims))]


def orthonormality_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.T @ u - np.eye(u.shape[1])))) if u.size else 0.0


class FlagPoint:
    """A point on a flag manifold, held as a column-orthonormal representative."""

    __slots__ = ("rep", "ftype")

    def __init__(self, rep, ftype: FlagType, tol: float = ORTHO_TOL):
        rep = np.array(rep, dtype=float)
        if rep.ndim == 1:
            rep = rep[:, None]
        if rep.shape != (ftype.ambient, ftype.nk):
            raise DimensionMismatch(
                f"representative shape {rep.shape} does not match flag type {ftype}"
            )
        defect = orthonormality_defect(rep)
        if not defect <= tol:
            raise DimensionMismatch(f"representative is not column-orthonormal (defect {defect:.2e})")
        rep.setflags(write=False)
        self.rep = rep
        self.ftype = ftype

    def block(self, i: int) -> np.ndarray:
        """Columns of the i-th block (1-based)."""
        sel = block_selectors(self.ftype)[i - 1]
        return self.rep[:, sel.slice]

    def blocks(self) -> list[np.ndarray]:
        return [self.rep[:, s.slice] for s in block_selectors(self.ftype)]

    def __repr__(self):
        return f"FlagPoint(ftype={self.ftype}, rep=<{self.rep.shape[0]}x{self.rep.shape[1]}>)"


def project_block(F: FlagPoint, i: int, x) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the span of block ``i``."""
    x = np.asarray(x, dtype=float)
    if not 1 <= i <= F.ftype.k:
        raise DimensionMismatch(f"block index {i} outside 1..{F.ftype.k}")
    if x.shape[0] != F.ftype.ambient:
        raise DimensionMismatch(f"vector length {x.shape[0]} != ambient {F.ftype.ambient}")
    ui = F.block(i)
    return ui @ (ui.T @ x)


def chordal_distance(F1: FlagPoint, F2: FlagPoint) -> float:
    if F1.ftype != F2.ftype:
        raise TypeMismatch(f"flag types differ: {F1.ftype} vs {F2.ftype}")
    # m_i - ||X_i^T Y_i||^2 equals ||Y_i - X_i X_i^T Y_i||^2 for orthonormal blocks;
    # the residual form avoids cancellation when the flags nearly coincide
    total = 0.0
    for sel in block_selectors(F1.ftype):
        x, y = F1.rep[:, sel.slice], F2.rep[:, sel.slice]
        total += np.sum((y - x @ (x.T @ y)) ** 2)
    return float(np.sqrt(total))


def random_flag(ft: FlagType, rng=None) -> FlagPoint:
    """Q factor of a Gaussian matrix; deterministic for a given seed."""
    g = as_generator(rng).standard_normal((ft.ambient, ft.nk))
    q, _ = qr_positive(g)
    return FlagPoint(q, ft)


def svd_init_flag(X, ft: FlagType) -> FlagPoint:
    """Top ``n_k`` left singular vectors of the data matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != ft.ambient:
        raise DimensionMismatch(f"data shape {X.shape} incompatible with {ft}")
    u, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size < ft.nk or s.size == 0 or s[ft.nk - 1] <= 1e-10 * s[0]:
        raise RankDeficient(f"data rank below {ft.nk}")
    return FlagPoint(u[:, : ft.nk], ft)


def eigen_flag(C, ft: FlagType) -> FlagPoint:
    """Flag spanned by the leading eigenvectors of a symmetric matrix."""
    w, v = np.linalg.eigh(np.asarray(C, dtype=float))
    order = np.argsort(w)[::-1]
    return FlagPoint(v[:, order[: ft.nk]], ft)
