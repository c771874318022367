"""Plain-text file formats for datasets, labels, fitted flags, scores and ROC curves.

Dataset files start with a header such as::

    #flagpca v1 kind=grassmann shape=4x2 k=2 n=4

followed by one comma-separated, row-major flattened sample per line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, FormatError
from .flags import FlagPoint, FlagType
from .manifolds import POINT_TOL, Euclidean, Grassmann, Manifold, PreShape, Sphere
from .robust import Variant
from .tangent import PLAIN_TPCA, TangentFitResult

MAGIC = "#flagpca v1"
FIT_MAGIC = "#flagpca-fit v1"
REPROJECT_TOL = 1e-6


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _row(values) -> str:
    return ",".join(fmt(v) for v in np.ravel(values))


def _parse_row(line: str, lineno: int) -> np.ndarray:
    try:
        return np.array([float(t) for t in line.split(",")])
    except ValueError as exc:
        raise FormatError(f"line {lineno}: {exc}") from None


def _parse_header(line: str, magic: str) -> dict:
    if not line.startswith(magic):
        raise FormatError(f"missing header {magic!r}")
    fields = {}
    for tok in line[len(magic):].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise FormatError(f"bad header token {tok!r}")
        fields[key] = val
    return fields


def _shape(text: str) -> tuple[int, int]:
    try:
        r, c = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise FormatError(f"bad shape {text!r}") from None
    return r, c


def manifold_from_header(kind: str, shape: tuple[int, int]) -> Manifold:
    r, c = shape
    if kind == "euclidean":
        return Euclidean(r * c)
    if kind == "sphere":
        return Sphere(r * c - 1)
    if kind == "grassmann":
        return Grassmann(c, r)
    if kind == "preshape2":
        if c != 2:
            raise FormatError("preshape2 samples must have 2 columns")
        return PreShape(r)
    raise FormatError(f"unknown manifold kind {kind!r}")


def _header_shape(M: Manifold) -> tuple[int, int]:
    if len(M.shape) == 1:
        return 1, M.shape[0]
    return M.shape


def dataset_header(M: Manifold) -> str:
    r, c = _header_shape(M)
    head = f"{MAGIC} kind={M.kind} shape={r}x{c}"
    if isinstance(M, Grassmann):
        head += f" k={M.k} n={M.n}"
    return head


def write_dataset(path, M: Manifold, points) -> None:
    pts = np.asarray(points, dtype=float).reshape((-1,) + M.shape)
    lines = [dataset_header(M)] + [_row(p) for p in pts]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path) -> tuple[Manifold, np.ndarray]:
    """Load a dataset; slightly-off points are re-projected, badly-off ones rejected."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError("empty file")
    head = _parse_header(lines[0], MAGIC)
    if "kind" not in head or "shape" not in head:
        raise FormatError("header needs kind= and shape=")
    M = manifold_from_header(head["kind"], _shape(head["shape"]))
    size = int(np.prod(M.shape))
    pts = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        row = _parse_row(line, lineno)
        if row.size != size:
            raise FormatError(f"line {lineno}: expected {size} values, got {row.size}")
        x = row.reshape(M.shape)
        defect = M.point_defect(x)
        if not np.isfinite(defect) or defect > REPROJECT_TOL:
            raise FormatError(f"line {lineno}: not a valid {M.kind} point (defect {defect:.3g})")
        # points already valid to working precision are kept verbatim so files round-trip exactly
        if defect > POINT_TOL:
            x = M.project_point(x)
        pts.append(x)
    return M, np.array(pts).reshape((len(pts),) + M.shape)


def write_labels(path, labels) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")


def read_labels(path) -> np.ndarray:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise FormatError(f"line {lineno}: bad label {line!r}") from None
    return np.array(out, dtype=int)


def write_scores(path, scores) -> None:
    Path(path).write_text("".join(fmt(s) + "\n" for s in scores), encoding="utf-8")


def read_scores(path) -> np.ndarray:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            out.append(float(line))
        except ValueError:
            raise FormatError(f"line {lineno}: bad score {line!r}") from None
    return np.array(out)


def write_roc(path, fpr, tpr, auc: float) -> None:
    lines = [f"{fmt(f)},{fmt(t)}" for f, t in zip(fpr, tpr)]
    lines.append(f"#auc {auc:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fit(path, fit: TangentFitResult, tangent: bool, trace, converged: bool, iterations: int) -> None:
    M = fit.manifold
    r, c = _header_shape(M)
    variant = fit.variant.value if isinstance(fit.variant, Variant) else fit.variant
    ft = fit.flag.ftype
    head = (f"{FIT_MAGIC} variant={variant} flag={','.join(map(str, ft.dims))} ambient={ft.ambient} "
            f"manifold={M.kind} shape={r}x{c} tangent={int(tangent)} "
            f"converged={int(converged)} iterations={iterations}")
    lines = [head, "#base", _row(fit.base), "#flag"]
    lines += [_row(row) for row in fit.flag.rep]
    lines += [f"#obj {i} {fmt(v)}" for i, v in enumerate(trace)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_fit(path) -> tuple[TangentFitResult, dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError("empty fit file")
    head = _parse_header(lines[0], FIT_MAGIC)
    try:
        M = manifold_from_header(head["manifold"], _shape(head["shape"]))
        dims = tuple(int(d) for d in head["flag"].split(","))
        ambient = int(head["ambient"])
        variant = head["variant"]
    except KeyError as exc:
        raise FormatError(f"fit header is missing {exc}") from None
    variant = PLAIN_TPCA if variant == PLAIN_TPCA else Variant(variant)
    section, base, rows = None, None, []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            if line in ("#base", "#flag"):
                section = line[1:]
            continue
        if not line.strip():
            continue
        row = _parse_row(line, lineno)
        if section == "base":
            base = row.reshape(M.shape)
        elif section == "flag":
            rows.append(row)
        else:
            raise FormatError(f"line {lineno}: data outside a section")
    if base is None or not rows:
        raise FormatError("fit file needs #base and #flag sections")
    rep = np.array(rows)
    if rep.shape != (ambient, dims[-1]):
        raise DimensionMismatch(f"flag block has shape {rep.shape}, expected {(ambient, dims[-1])}")
    flag = FlagPoint(rep, FlagType(dims, ambient), tol=1e-8)
    return TangentFitResult(base, flag, variant, M), head
