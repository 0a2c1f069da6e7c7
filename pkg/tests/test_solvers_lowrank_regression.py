"""Tests for compressive PCA (quadratic sketches) and sketched least squares (outer products)."""

import numpy as np
import pytest

from sketch_learning.baselines import empirical_autocorrelation, empirical_risk, exact_pca, principal_angles
from sketch_learning.core import (
    IncompatibleSketchError,
    InvalidArgumentError,
    LowRankPsd,
    MapKind,
    NumericalError,
    SolverOptions,
    Task,
)
from sketch_learning.features import FeatureMapSpec
from sketch_learning.privacy import privatize_laplace
from sketch_learning.sketching import sketch_dataset
from sketch_learning.solvers import (
    autocorrelation,
    fit_lowrank_psd,
    ls_regression,
    lowrank_objective,
    recovered_subspace,
    sketch_cost,
)


@pytest.fixture
def low_rank_data(rng) -> np.ndarray:
    """2000 rows in 5-D lying exactly in a 2-D subspace."""
    basis, _ = np.linalg.qr(rng.standard_normal((5, 2)))
    return (rng.standard_normal((2000, 2)) * [3.0, 2.0]) @ basis.T


@pytest.fixture
def regression_data(rng):
    theta = np.array([[1.5, -0.5]])
    x2 = rng.standard_normal((500, 2))
    y = x2 @ theta.T + 0.1 * rng.standard_normal((500, 1))
    return np.hstack([y, x2]), theta


class TestLowRankObjective:
    def test_gradient_finite_difference(self, rng):
        w = rng.standard_normal((20, 4))
        z = rng.random(20)
        u = rng.standard_normal((4, 2))
        _, grad = lowrank_objective(u, w, z)
        h = 1e-6
        for i in range(4):
            for j in range(2):
                e = np.zeros_like(u)
                e[i, j] = h
                fd = (lowrank_objective(u + e, w, z)[0] - lowrank_objective(u - e, w, z)[0]) / (2 * h)
                assert grad[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_cost_matches_objective(self, rng, quadratic_spec, small_data):
        s = sketch_dataset(small_data, quadratic_spec)
        model = LowRankPsd(factor=rng.standard_normal((3, 2)))
        f, _ = lowrank_objective(model.factor, quadratic_spec.frequencies, s.values)
        assert sketch_cost(model, s) == pytest.approx(f)


class TestFitLowRankPsd:
    def test_recovers_subspace(self, low_rank_data):
        spec = FeatureMapSpec.create(MapKind.QUADRATIC, d=5, m=60, sigma_w=1.0, seed=2)
        s = sketch_dataset(low_rank_data, spec)
        model = fit_lowrank_psd(s, 2, opts=SolverOptions(restarts=3, tolerance=1e-12))
        angles = principal_angles(recovered_subspace(model), exact_pca(low_rank_data, 2))
        assert np.max(angles) < 1e-2
        r_hat = empirical_autocorrelation(low_rank_data)
        assert np.linalg.norm(model.matrix - r_hat) / np.linalg.norm(r_hat) < 1e-2

    @pytest.mark.parametrize("d", [10, 20])
    @pytest.mark.parametrize("k", [1, 3])
    def test_noisy_subspace_matches_exact_pca(self, rng, d, k):
        basis, _ = np.linalg.qr(rng.standard_normal((d, k)))
        signal = (rng.standard_normal((4000, k)) * [3.0, 2.0, 1.5][:k]) @ basis.T
        data = signal + 0.01 * rng.standard_normal(signal.shape)
        spec = FeatureMapSpec.create(MapKind.QUADRATIC, d=d, m=5 * d * k, sigma_w=1.0, seed=d + k)
        model = fit_lowrank_psd(sketch_dataset(data, spec), k, opts=SolverOptions(restarts=3, tolerance=1e-10))
        angles = principal_angles(recovered_subspace(model), exact_pca(data, k))
        assert np.max(angles) < 0.05

    def test_never_worse_than_zero(self, small_data, quadratic_spec):
        s = sketch_dataset(small_data, quadratic_spec)
        model = fit_lowrank_psd(s, 1, opts=SolverOptions(restarts=2))
        assert model.objective <= float(s.values @ s.values)
        assert model.factor.shape == (3, 1)

    def test_deterministic(self, small_data, quadratic_spec):
        s = sketch_dataset(small_data, quadratic_spec)
        a = fit_lowrank_psd(s, 2, opts=SolverOptions(restarts=2, seed=4))
        b = fit_lowrank_psd(s, 2, opts=SolverOptions(restarts=2, seed=4))
        np.testing.assert_array_equal(a.factor, b.factor)

    def test_rank_bounds(self, small_data, quadratic_spec):
        s = sketch_dataset(small_data, quadratic_spec)
        with pytest.raises(InvalidArgumentError):
            fit_lowrank_psd(s, 0)
        with pytest.raises(InvalidArgumentError):
            fit_lowrank_psd(s, 4)

    def test_needs_quadratic_sketch(self, small_data, rff_spec):
        with pytest.raises(IncompatibleSketchError):
            fit_lowrank_psd(sketch_dataset(small_data, rff_spec), 1)

    def test_low_rank_model_needs_quadratic_sketch(self, small_data, rff_spec):
        with pytest.raises(IncompatibleSketchError):
            sketch_cost(LowRankPsd(factor=np.ones((3, 1))), sketch_dataset(small_data, rff_spec))


class TestRegression:
    def test_autocorrelation_matches_data(self, small_data, outer_spec):
        s = sketch_dataset(small_data, outer_spec)
        np.testing.assert_allclose(autocorrelation(s), empirical_autocorrelation(small_data), atol=1e-12)

    def test_matches_least_squares(self, regression_data, outer_spec):
        data, _ = regression_data
        s = sketch_dataset(data, outer_spec)
        model = ls_regression(s, 1, 2)
        expected, *_ = np.linalg.lstsq(data[:, 1:], data[:, :1], rcond=None)
        np.testing.assert_allclose(model.theta, expected.T, atol=1e-10)

    def test_objective_is_empirical_risk(self, regression_data, outer_spec):
        data, _ = regression_data
        model = ls_regression(sketch_dataset(data, outer_spec), 1, 2)
        assert model.objective == pytest.approx(empirical_risk(Task.REGRESS, model, data), rel=1e-8)

    def test_close_to_truth(self, regression_data, outer_spec):
        data, theta = regression_data
        model = ls_regression(sketch_dataset(data, outer_spec), 1, 2)
        np.testing.assert_allclose(model.theta, theta, atol=0.05)

    def test_ridge(self, regression_data, outer_spec):
        data, _ = regression_data
        s = sketch_dataset(data, outer_spec)
        r = empirical_autocorrelation(data)
        expected = np.linalg.solve(r[1:, 1:] + 0.5 * np.eye(2), r[0, 1:])
        np.testing.assert_allclose(ls_regression(s, 1, 2, ridge=0.5).theta[0], expected, atol=1e-10)

    def test_ill_conditioned_suggests_ridge(self, rng, outer_spec):
        x = rng.standard_normal((100, 1))
        data = np.hstack([rng.standard_normal((100, 1)), x, x])
        s = sketch_dataset(data, outer_spec)
        with pytest.raises(NumericalError, match="ridge"):
            ls_regression(s, 1, 2)
        assert ls_regression(s, 1, 2, ridge=1e-3).theta.shape == (1, 2)

    def test_dimension_split(self, small_data, outer_spec):
        s = sketch_dataset(small_data, outer_spec)
        with pytest.raises(InvalidArgumentError):
            ls_regression(s, 1, 1)
        with pytest.raises(InvalidArgumentError):
            ls_regression(s, 1, 2, ridge=-1.0)

    def test_needs_outer_product_sketch(self, small_data, quadratic_spec):
        with pytest.raises(IncompatibleSketchError):
            ls_regression(sketch_dataset(small_data, quadratic_spec), 1, 2)

    def test_privatized_sketch_is_symmetrized(self, regression_data, outer_spec):
        data, _ = regression_data
        s = privatize_laplace(sketch_dataset(data, outer_spec), epsilon=1.0, radius=10.0)
        r = autocorrelation(s)
        np.testing.assert_array_equal(r, r.T)
