import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagpca.errors import BaseMismatch, CutLocus, DimensionMismatch, NoConvergenceWarning
from flagpca.manifolds import (
    Euclidean,
    Grassmann,
    MeanOptions,
    PreShape,
    Sphere,
    karcher_mean,
    karcher_median,
)

seeds = st.integers(0, 2**32 - 1)
CURVED = [Sphere(2), Sphere(4), Grassmann(2, 4), Grassmann(1, 3), Grassmann(3, 5), PreShape(5), PreShape(56)]
ALL = [Euclidean(3)] + CURVED


def e(i, n):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def safe_radius(M):
    return 0.5 * min(M.injectivity_radius, np.pi)


class TestExp:
    def test_quarter_circle(self):
        S = Sphere(2)
        np.testing.assert_allclose(S.exp(e(0, 3), np.pi / 2 * e(1, 3)), e(1, 3), atol=1e-15)

    @pytest.mark.parametrize("M", ALL, ids=repr)
    def test_zero_tangent(self, M):
        x = M.random_point(0)
        np.testing.assert_array_equal(M.exp(x, np.zeros(M.shape)), x)

    def test_projective_line(self):
        G = Grassmann(1, 2)
        t = np.pi / 4
        y = G.exp(np.array([[1.0], [0.0]]), np.array([[0.0], [t]]))
        assert G.dist(y, np.array([[np.cos(t)], [np.sin(t)]])) < 1e-12

    def test_base_mismatch(self):
        with pytest.raises(BaseMismatch):
            Sphere(2).exp(e(0, 3), np.zeros(4))


class TestLog:
    @pytest.mark.parametrize("M", ALL, ids=repr)
    def test_same_point(self, M):
        x = M.random_point(1)
        np.testing.assert_allclose(M.log(x, x), 0, atol=1e-12)

    def test_sphere_quarter(self):
        np.testing.assert_allclose(Sphere(2).log(e(0, 3), e(1, 3)), np.pi / 2 * e(1, 3), atol=1e-15)

    def test_antipode(self):
        with pytest.raises(CutLocus):
            Sphere(2).log(e(0, 3), -e(0, 3))

    def test_grassmann_cut_locus(self):
        G = Grassmann(1, 2)
        with pytest.raises(CutLocus):
            G.log(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]))

    def test_grassmann_representative_invariance(self, rng):
        G = Grassmann(2, 4)
        x, y = G.random_point(rng), G.random_point(rng)
        Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        np.testing.assert_allclose(G.log(x, y @ Q), G.log(x, y), atol=1e-10)

    @pytest.mark.parametrize("M", CURVED, ids=repr)
    def test_batch_matches_single(self, M, rng):
        x = M.random_point(rng)
        ys = np.stack([M.exp(x, M.random_tangent(x, rng, 0.4)) for _ in range(4)])
        np.testing.assert_allclose(M.log_batch(x, ys), np.stack([M.log(x, y) for y in ys]), atol=1e-12)


class TestDist:
    def test_examples(self):
        assert Sphere(2).dist(e(0, 3), e(0, 3)) == 0.0
        assert Sphere(2).dist(e(0, 3), e(1, 3)) == pytest.approx(np.pi / 2)
        G = Grassmann(1, 2)
        d = G.dist(np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]]) / np.sqrt(2))
        assert d == pytest.approx(np.pi / 4)

    def test_tiny_angles_resolved(self):
        S = Sphere(2)
        t = 1e-9
        y = np.array([np.cos(t), np.sin(t), 0.0])
        assert S.dist(e(0, 3), y) == pytest.approx(t, rel=1e-6)

    @pytest.mark.parametrize("M", CURVED, ids=repr)
    def test_symmetric(self, M, rng):
        x, y = M.random_point(rng), M.random_point(rng)
        assert M.dist(x, y) == pytest.approx(M.dist(y, x), abs=1e-12)


class TestRoundTrips:
    @pytest.mark.parametrize("M", CURVED, ids=repr)
    @given(seed=seeds, frac=st.floats(0.0, 1.0))
    def test_log_exp(self, M, seed, frac):
        rng = np.random.default_rng(seed)
        x = M.random_point(rng)
        v = M.random_tangent(x, rng, frac * safe_radius(M))
        y = M.exp(x, v)
        assert M.point_defect(y) <= 1e-9
        np.testing.assert_allclose(M.log(x, y), v, atol=1e-8)
        assert abs(M.dist(x, y) - np.linalg.norm(v)) <= 1e-8

    @pytest.mark.parametrize("M", ALL, ids=repr)
    def test_flatten_round_trip(self, M, rng):
        x = M.random_point(rng)
        v = M.random_tangent(x, rng)
        np.testing.assert_allclose(M.unflatten(x, M.flatten(v)), v, atol=1e-14)

    def test_unflatten_removes_radial_part(self):
        S = Sphere(2)
        np.testing.assert_allclose(S.unflatten(e(0, 3), [3.0, 1.0, 2.0]), [0.0, 1.0, 2.0])

    def test_flatten_layout(self):
        v = np.arange(8.0).reshape(4, 2)
        w = Grassmann(2, 4).flatten(v)
        assert w.shape == (8,) and w[1] == v[0, 1]

    def test_unflatten_length(self):
        with pytest.raises(DimensionMismatch):
            Sphere(2).unflatten(e(0, 3), np.zeros(2))

    @pytest.mark.parametrize("M", ALL, ids=repr)
    def test_tangent_basis(self, M, rng):
        x = M.random_point(rng)
        Q = M.tangent_basis(x)
        assert Q.shape == (M.flat_dim, M.dim)
        np.testing.assert_allclose(Q.T @ Q, np.eye(M.dim), atol=1e-10)
        v = M.random_tangent(x, rng)
        np.testing.assert_allclose(Q @ (Q.T @ M.flatten(v)), M.flatten(v), atol=1e-10)

    def test_preshape_points_are_centered(self, rng):
        P = PreShape(6)
        x = P.random_point(rng)
        assert abs(np.linalg.norm(x) - 1) < 1e-12
        np.testing.assert_allclose(x.sum(axis=0), 0, atol=1e-12)
        v = P.random_tangent(x, rng)
        np.testing.assert_allclose(v.sum(axis=0), 0, atol=1e-12)
        assert abs(np.sum(v * x)) < 1e-12


def symmetric_pair(t):
    return np.array([[np.cos(t), np.sin(t), 0.0], [np.cos(t), -np.sin(t), 0.0]])


class TestKarcherMean:
    def test_single_point(self):
        x = Sphere(2).random_point(3)
        np.testing.assert_allclose(karcher_mean(Sphere(2), [x]), x)

    def test_symmetric_pair(self):
        mu = karcher_mean(Sphere(2), symmetric_pair(0.6))
        assert Sphere(2).dist(mu, e(0, 3)) <= 1e-6

    def test_euclidean(self):
        mu = karcher_mean(Euclidean(2), [[0, 0], [2, 0], [1, 3]])
        np.testing.assert_allclose(mu, [1, 1])

    def test_stationary(self, rng):
        G = Grassmann(2, 4)
        c = G.random_point(rng)
        pts = [G.exp(c, G.random_tangent(c, rng, 0.3)) for _ in range(10)]
        mu, info = karcher_mean(G, pts, full_output=True)
        assert info.converged
        assert np.linalg.norm(G.log_batch(mu, np.array(pts)).mean(axis=0)) < 1e-8
        assert G.point_defect(mu) <= 1e-9

    def test_isometry_symmetric_cloud(self, rng):
        S = Sphere(3)
        mu0 = e(0, 4)
        vs = [S.random_tangent(mu0, rng, 0.4) for _ in range(5)]
        pts = [S.exp(mu0, s * v) for v in vs for s in (1, -1)]
        assert S.dist(karcher_mean(S, pts), mu0) <= 1e-6

    def test_no_convergence_warns(self):
        with pytest.warns(NoConvergenceWarning):
            karcher_mean(Sphere(2), symmetric_pair(0.6), MeanOptions(max_iters=3))


class TestKarcherMedian:
    def test_single_point(self):
        x = Grassmann(2, 4).random_point(2)
        np.testing.assert_allclose(karcher_median(Grassmann(2, 4), [x]), x)

    def test_resists_outlier(self):
        pts = np.array([[0.0], [0.0], [0.0], [10.0]])
        med = karcher_median(Euclidean(1), pts)
        assert abs(med[0]) <= 0.5 and abs(med[0]) < 2.5

    def test_symmetric_pair(self):
        mu = karcher_median(Sphere(2), symmetric_pair(0.6))
        assert Sphere(2).dist(mu, e(0, 3)) <= 1e-6

    @given(seeds)
    def test_beats_mean_on_contaminated_line(self, seed):
        rng = np.random.default_rng(seed)
        pts = np.r_[rng.normal(0, 1, 15), rng.normal(30, 1, 4)][:, None]
        E = Euclidean(1)
        cost = lambda m: np.abs(pts[:, 0] - m[0]).sum()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoConvergenceWarning)
            med = karcher_median(E, pts)
        assert cost(med) <= cost(karcher_mean(E, pts)) + 1e-9

    def test_options_validated(self):
        with pytest.raises(ValueError):
            MeanOptions(step=0.0)
