import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagpca.errors import BadDims, DimensionMismatch
from flagpca.flags import FlagPoint, FlagType, chordal_distance, random_flag
from flagpca.robust import (
    FitOptions,
    Variant,
    fit,
    named_variant,
    robust_objective,
    weights_minus,
    weights_plus,
)

from conftest import l1_pca_optimum, rotated

seeds = st.integers(0, 2**32 - 1)
LINE = FlagType((1,), 2)
E1 = FlagPoint(np.array([[1.0], [0.0]]), LINE)


def centered_cube(p, n, seed):
    X = np.random.default_rng(seed).random((n, p))
    return X - X.mean(axis=1, keepdims=True)


class TestWeights:
    def test_plus(self):
        assert weights_plus(E1, np.array([[3.0], [4.0]]))[0, 0] == pytest.approx(1 / 3)
        assert weights_plus(E1, np.array([[0.0], [1.0]]), 1e-8)[0, 0] == pytest.approx(1e8)
        assert weights_plus(E1, np.array([[1e-8], [0.0]]), 1e-8)[0, 0] == pytest.approx(1e8)

    def test_minus(self):
        assert weights_minus(E1, np.array([[3.0], [4.0]]))[0, 0] == pytest.approx(1 / 4)
        assert weights_minus(E1, np.array([[5.0], [0.0]]), 1e-8)[0, 0] == pytest.approx(1e8)
        assert weights_minus(E1, np.zeros((2, 1)), 1e-8)[0, 0] == pytest.approx(1e8)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            weights_plus(E1, np.ones((3, 2)))

    @given(seeds, st.sampled_from([1e-8, 1e-3, 1.0]))
    def test_bounded(self, seed, eps):
        rng = np.random.default_rng(seed)
        ft = FlagType((1, 3), 5)
        F = random_flag(ft, rng)
        X = rng.standard_normal((5, 6))
        X[:, 0] = 0.0
        for W in (weights_plus(F, X, eps), weights_minus(F, X, eps)):
            assert W.shape == (2, 6)
            assert np.all(np.isfinite(W)) and np.all(W > 0) and np.all(W <= 1 / eps * (1 + 1e-12))


class TestObjective:
    def test_examples(self):
        assert robust_objective(Variant.FRPCA, E1, np.array([[1.0], [0.0]])) == pytest.approx(1.0)
        assert robust_objective(Variant.FWPCA, E1, np.array([[3.0], [4.0]])) == pytest.approx(4.0)
        F = FlagPoint(np.eye(3)[:, :2], FlagType((1, 2), 3))
        x = np.ones((3, 1))
        # each block contributes the norm of its own projection: 1 + 1
        assert robust_objective(Variant.FRPCA, F, x) == pytest.approx(2.0)

    @given(seeds, st.sampled_from(list(Variant)))
    def test_representative_invariance(self, seed, variant):
        rng = np.random.default_rng(seed)
        ft = FlagType((2, 3), 6)
        F = random_flag(ft, rng)
        X = rng.standard_normal((6, 9))
        a = robust_objective(variant, F, X)
        assert robust_objective(variant, rotated(F, rng), X) == pytest.approx(a, rel=1e-9)


class TestFit:
    @pytest.mark.parametrize("seed", range(5))
    def test_fdpcp_trace_nonincreasing(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((6, 40))
        res = fit(Variant.FDPCP, X, FlagType((1, 2), 6), FitOptions(seed=seed))
        assert np.all(np.diff(res.objective_trace) <= 1e-12)
        assert len(res.objective_trace) == res.iterations + 1

    @pytest.mark.parametrize("variant", list(Variant))
    def test_runs_and_reports(self, variant):
        X = centered_cube(30, 5, 3)
        res = fit(variant, X, FlagType((1, 2), 5), FitOptions(seed=1))
        assert res.variant == variant
        assert res.objective == pytest.approx(robust_objective(variant, res.directions, X))
        assert res.iterations <= 50

    def test_l1_oracle(self):
        hits = 0
        for seed in range(5):
            X = centered_cube(10, 5, seed)
            res = fit(Variant.FRPCA, X, FlagType((1,), 5), FitOptions(init="svd", seed=seed, restarts=10))
            hits += res.objective >= 0.98 * l1_pca_optimum(X)
        assert hits >= 4

    def test_never_exceeds_l1_optimum(self):
        X = centered_cube(8, 4, 11)
        res = fit(Variant.FRPCA, X, FlagType((1,), 4), FitOptions(seed=0))
        assert res.objective <= l1_pca_optimum(X) + 1e-9

    def test_fwpca_recovers_exact_plane(self, rng):
        B = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        X = B @ rng.standard_normal((2, 25))
        ft = FlagType((2,), 6)
        res = fit(Variant.FWPCA, X, ft, FitOptions(seed=0, max_iters=200))
        assert res.objective <= 1e-6
        assert chordal_distance(res.directions, FlagPoint(B, ft)) <= 1e-5

    def test_fdpcp_finds_normal_of_hyperplane(self, rng):
        normal = np.linalg.qr(rng.standard_normal((4, 1)))[0]
        inl = rng.standard_normal((4, 60))
        inl -= normal @ (normal.T @ inl)
        X = np.hstack([inl, 0.5 * rng.standard_normal((4, 8))])
        res = fit(Variant.FDPCP, X, FlagType((1,), 4), FitOptions(init="svd", seed=0, restarts=5))
        assert abs(res.directions.rep[:, 0] @ normal[:, 0]) > 0.99

    def test_full_and_grassmann_signatures_differ(self):
        X = centered_cube(40, 5, 7)
        a = fit(Variant.FRPCA, X, FlagType((1, 2), 5), FitOptions(seed=0))
        b = fit(Variant.FRPCA, X, FlagType((2,), 5), FitOptions(seed=0))
        Fa = FlagPoint(a.directions.rep, FlagType((2,), 5))
        assert chordal_distance(Fa, b.directions) > 1e-3
        assert abs(a.objective - b.objective) > 1e-6

    def test_permutation_symmetric_data(self, rng):
        Y = rng.standard_normal((4, 10))
        P = np.eye(4)[[1, 0, 2, 3]]
        X = np.hstack([Y, P @ Y])
        ft = FlagType((1, 2), 4)
        res = fit(Variant.FRPCA, X, ft, FitOptions(seed=0))
        flipped = FlagPoint(P @ res.directions.rep, ft, tol=1e-9)
        assert robust_objective(Variant.FRPCA, flipped, X) == pytest.approx(res.objective, rel=1e-9)

    def test_deterministic(self):
        X = centered_cube(20, 4, 2)
        a = fit(Variant.FWPCA, X, FlagType((1, 2), 4), FitOptions(seed=5))
        b = fit(Variant.FWPCA, X, FlagType((1, 2), 4), FitOptions(seed=5))
        np.testing.assert_array_equal(a.directions.rep, b.directions.rep)

    def test_explicit_init(self):
        X = centered_cube(20, 4, 2)
        ft = FlagType((1,), 4)
        init = random_flag(ft, 9)
        res = fit(Variant.FRPCA, X, ft, FitOptions(init=init, max_iters=0))
        np.testing.assert_array_equal(res.directions.rep, init.rep)
        assert res.iterations == 0

    def test_empty_dataset(self):
        with pytest.raises(DimensionMismatch, match="empty dataset"):
            fit(Variant.FRPCA, np.zeros((3, 0)), FlagType((1,), 3))

    def test_rank_deficient_warns(self):
        X = np.outer([1.0, 2.0, 0.0, 1.0], np.arange(1.0, 6.0))
        with pytest.warns(UserWarning, match="rank"):
            fit(Variant.FRPCA, X, FlagType((2,), 4), FitOptions(seed=0))

    def test_clamped_weights_stay_finite(self):
        X = np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = fit(Variant.FDPCP, X, FlagType((1,), 3), FitOptions(seed=0))
        assert np.all(np.isfinite(res.objective_trace))

    def test_option_validation(self):
        with pytest.raises(ValueError):
            FitOptions(obj_tol=0.0)
        with pytest.raises(ValueError):
            FitOptions(init="pca")


class TestNamedVariant:
    def test_l1(self):
        assert named_variant("L1_RPCA", 3, 5) == (Variant.FRPCA, FlagType((1, 2, 3), 5))

    def test_l2(self):
        assert named_variant("L2_DPCP", 2, 4) == (Variant.FDPCP, FlagType((2,), 4))

    def test_k1_collapse(self):
        assert named_variant("L2-WPCA", 1, 3) == (Variant.FWPCA, FlagType((1,), 3))
        assert named_variant("L1_WDPCP", 1, 3)[1] == FlagType((1,), 3)

    @pytest.mark.parametrize("args", [("L1_RPCA", 0, 3), ("L1_RPCA", 3, 3), ("L3_RPCA", 1, 3), ("L1_FOO", 1, 3)])
    def test_bad(self, args):
        with pytest.raises(BadDims):
            named_variant(*args)
