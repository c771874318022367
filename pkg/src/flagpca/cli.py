"""``flagpca`` command line: generate datasets, fit flags, score samples, evaluate ROC."""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import io, synth
from .errors import FlagPCAError
from .evaluation import normalize_scores, roc_auc
from .manifolds import Euclidean, PreShape
from .robust import FitOptions, Variant, named_variant
from .stiefel import CgdOptions
from .tangent import PLAIN_TPCA, fit_tangent, score_points

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


class UsageError(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("FLAGPCA_SEED")
    return int(env) if env not in (None, "") else 0


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_gen(args) -> None:
    kind, seed = args.kind, args.seed
    labels = None
    if kind == "cube":
        if args.p is None or args.n is None:
            raise UsageError("--kind cube needs --p and --n")
        M = Euclidean(args.n)
        points = synth.gen_uniform_cube(args.p, args.n, seed).T
    elif kind == "sphere4":
        ds = synth.gen_sphere4(seed)
        M, points, labels = ds.manifold, ds.points, ds.labels
    elif kind == "gr24":
        ds = synth.gen_grassmann24(args.inliers, args.outliers, seed)
        M, points, labels = ds.manifold, ds.points, ds.labels
    elif kind == "clusters":
        X, labels = synth.gen_clusters(seed)
        M, points = Euclidean(X.shape[0]), X.T
    else:
        if args.count is None:
            raise UsageError("--kind preshape-out needs --count")
        points = synth.gen_preshape_outliers(args.shape, args.count, args.landmarks, seed)
        M = PreShape(args.landmarks)
    io.write_dataset(args.out, M, points)
    print(args.out)
    if args.labels:
        if labels is None:
            labels = np.ones(len(points), dtype=int) if kind == "preshape-out" else np.zeros(len(points), dtype=int)
        io.write_labels(args.labels, labels)
        print(args.labels)


def _resolve_variant(args, dim: int):
    name = args.variant
    if name.startswith("named:"):
        if args.k is None:
            raise UsageError("named variants need --k")
        variant, ft = named_variant(name[len("named:"):], args.k, dim)
        return variant, ft.dims
    if args.flag is None:
        raise UsageError("--flag is required unless a named variant is used")
    if name == PLAIN_TPCA:
        return PLAIN_TPCA, args.flag
    try:
        return Variant(name), args.flag
    except ValueError:
        raise UsageError(f"unknown variant {name!r}") from None


def cmd_fit(args) -> None:
    M, points = io.read_dataset(args.input)
    if not isinstance(M, Euclidean) and not args.tangent:
        raise UsageError(f"{M.kind} data needs --tangent")
    variant, dims = _resolve_variant(args, M.dim)
    if len(points) == 0:
        raise FlagPCAError("empty dataset")
    opts = FitOptions(
        max_iters=args.max_iters,
        eps_clamp=args.eps,
        init=args.init,
        seed=args.seed,
        inner=CgdOptions(),
    )
    # Euclidean data is centered by the same mean/median step the tangent pipeline uses
    fit = fit_tangent(variant, M, points, dims, opts)
    inner = fit.inner
    if variant == PLAIN_TPCA:
        trace, converged, iters = inner.values, inner.converged, inner.iterations
    else:
        trace, converged, iters = inner.objective_trace, inner.converged, inner.iterations
    io.write_fit(args.out, fit, args.tangent, trace, converged, iters)
    print(args.out)
    print(f"variant={getattr(variant, 'value', variant)} flag={','.join(map(str, dims))} "
          f"iterations={iters} converged={int(converged)}")


def cmd_score(args) -> None:
    fit, _ = io.read_fit(args.fit)
    M, points = io.read_dataset(args.input)
    if M != fit.manifold:
        raise FlagPCAError(f"dataset is on {M!r} but the fit is on {fit.manifold!r}")
    scores = score_points(fit, points, args.mode) if len(points) else np.zeros(0)
    if args.normalize and len(scores):
        scores = normalize_scores(scores)
    io.write_scores(args.out, scores)
    print(args.out)


def cmd_eval(args) -> None:
    scores = io.read_scores(args.scores)
    labels = io.read_labels(args.labels)
    roc = roc_auc(scores, labels)
    io.write_roc(args.out, roc.fpr, roc.tpr, roc.auc)
    print(args.out)
    print(f"auc={roc.auc:.6f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flagpca", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--kind", required=True, choices=["cube", "sphere4", "gr24", "clusters", "preshape-out"])
    g.add_argument("--seed", type=int, default=seed)
    g.add_argument("--p", type=int, help="number of samples (cube)")
    g.add_argument("--n", type=int, help="ambient dimension (cube)")
    g.add_argument("--inliers", type=int, default=100)
    g.add_argument("--outliers", type=int, default=20)
    g.add_argument("--count", type=int, help="number of pre-shape outliers")
    g.add_argument("--landmarks", type=int, default=56)
    g.add_argument("--shape", choices=["ellipse", "hairball"], default="ellipse")
    g.add_argument("--out", required=True)
    g.add_argument("--labels")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit flagified principal directions")
    f.add_argument("--variant", required=True,
                   help="frpca, fwpca, fdpcp, fwdpcp, tpca or named:<L1-RPCA|L2-DPCP|...>")
    f.add_argument("--flag", type=_int_list, help="signature, e.g. 1,2,3")
    f.add_argument("--k", type=int, help="number of directions for named variants")
    f.add_argument("--input", required=True)
    f.add_argument("--tangent", action="store_true", help="fit in the tangent space of a manifold dataset")
    f.add_argument("--init", choices=["random", "svd"], default="random")
    f.add_argument("--seed", type=int, default=seed)
    f.add_argument("--max-iters", type=int, default=50)
    f.add_argument("--eps", type=float, default=1e-8)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("score", help="outlier scores from a fit")
    s.add_argument("--fit", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--mode", choices=["primal", "dual"], default="primal")
    s.add_argument("--normalize", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    e = sub.add_parser("eval", help="ROC curve and AUC")
    e.add_argument("--scores", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"flagpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlagPCAError, ValueError, OSError) as exc:
        print(f"flagpca: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
