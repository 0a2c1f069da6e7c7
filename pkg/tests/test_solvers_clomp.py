"""Tests for greedy mixture fitting (k-means and GMM from RFF sketches)."""

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from sketch_learning.baselines import count_local_maxima, empirical_risk, lloyd_kmeans, parzen_score, synth_gmm
from sketch_learning.core import (
    CentroidModel,
    GmmModel,
    IncompatibleSketchError,
    InvalidArgumentError,
    MapKind,
    SolverOptions,
    SyntheticSpec,
    Task,
)
from sketch_learning.features import FeatureMapSpec, gaussian_atom, kernel_width
from sketch_learning.sketching import Sketch, sketch_dataset
from sketch_learning.solvers import (
    DiracFamily,
    GaussianFamily,
    clomp_gmm,
    clomp_kmeans,
    decoding_target,
    selection_criterion,
    sketch_cost,
)

_BOX = SolverOptions(lower=(-2.0, -2.0), upper=(2.0, 2.0), restarts=20)
_CENTERS = np.array([[-1.0, -1.0], [1.0, 1.0]])


def _two_point_data() -> np.ndarray:
    """60 copies of (−1, −1) and 40 of (1, 1): a sketch that is exactly a two-Dirac mixture."""
    return np.repeat(_CENTERS, [60, 40], axis=0)


@pytest.fixture
def point_spec() -> FeatureMapSpec:
    return FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=60, sigma_w=0.3, seed=4)


@pytest.fixture
def point_sketch(point_spec) -> Sketch:
    return sketch_dataset(_two_point_data(), point_spec)


class TestFamilies:
    def test_dirac_jacobian_with_phase(self, rng):
        w = rng.standard_normal((12, 2))
        phase = np.exp(-2j * np.pi * rng.random(12))
        family = DiracFamily(w, -np.ones(2), np.ones(2), phase)
        theta = np.array([0.3, -0.4])
        h = 1e-6
        for t in range(2):
            e = np.zeros(2)
            e[t] = h
            fd = (family.atom(theta + e) - family.atom(theta - e)) / (2 * h)
            np.testing.assert_allclose(family.jacobian(theta)[:, t], fd, atol=1e-6)

    def test_gaussian_jacobian_log_variance(self, rng):
        w = rng.standard_normal((12, 2))
        family = GaussianFamily(w, -np.ones(2), np.ones(2))
        theta = np.array([0.1, 0.2, np.log(0.3), np.log(0.05)])
        h = 1e-6
        for t in range(4):
            e = np.zeros(4)
            e[t] = h
            fd = (family.atom(theta + e) - family.atom(theta - e)) / (2 * h)
            np.testing.assert_allclose(family.jacobian(theta)[:, t], fd, atol=1e-6)

    def test_gaussian_bounds(self, rng):
        family = GaussianFamily(rng.standard_normal((4, 2)), np.zeros(2), np.full(2, 4.0), variance_floor=1e-4)
        lower, upper = family.bounds()
        np.testing.assert_allclose(lower[2:], np.log(1e-4))
        np.testing.assert_allclose(upper[2:], np.log(4.0))

    def test_random_init_inside_bounds(self, rng):
        family = GaussianFamily(rng.standard_normal((4, 3)), -np.ones(3), np.ones(3))
        lower, upper = family.bounds()
        for _ in range(20):
            theta = family.random_init(rng)
            assert np.all(theta >= lower) and np.all(theta <= upper)

    def test_inverted_box(self, rng):
        with pytest.raises(InvalidArgumentError):
            DiracFamily(rng.standard_normal((4, 2)), np.ones(2), np.zeros(2))


class TestDecodingTarget:
    def test_complex_sketch_is_matched_directly(self, point_sketch):
        target, phase = decoding_target(point_sketch)
        assert phase is None
        np.testing.assert_array_equal(target, point_sketch.values)

    def test_quantized_sketch_is_rescaled(self, small_data, quantized_spec):
        s = sketch_dataset(small_data, quantized_spec)
        target, phase = decoding_target(s)
        np.testing.assert_allclose(target, s.values * np.pi / 2)
        assert phase.shape == (s.m,)

    def test_quadratic_is_rejected(self, small_data, quadratic_spec):
        with pytest.raises(IncompatibleSketchError):
            decoding_target(sketch_dataset(small_data, quadratic_spec))


class TestSketchCost:
    def test_true_mixture_has_zero_cost(self, point_sketch):
        truth = CentroidModel(centroids=_CENTERS, weights=[0.6, 0.4])
        assert sketch_cost(truth, point_sketch) == pytest.approx(0.0, abs=1e-20)

    def test_wrong_mixture_costs_more(self, point_sketch):
        wrong = CentroidModel(centroids=_CENTERS + 0.5, weights=[0.6, 0.4])
        assert sketch_cost(wrong, point_sketch) > 1e-2

    def test_gmm_cost_uses_gaussian_atoms(self, point_spec):
        mu, var = np.array([0.2, -0.1]), np.array([0.3, 0.2])
        s = Sketch(values=gaussian_atom(point_spec, mu, var), n=10, spec=point_spec)
        model = GmmModel(weights=[1.0], means=[mu], variances=[var])
        assert sketch_cost(model, s) == pytest.approx(0.0, abs=1e-20)

    def test_fingerprint_mismatch(self, point_sketch):
        other = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=60, sigma_w=0.3, seed=5)
        truth = CentroidModel(centroids=_CENTERS, weights=[0.6, 0.4])
        with pytest.raises(IncompatibleSketchError):
            sketch_cost(truth, point_sketch, spec=other)


class TestClompKmeans:
    def test_recovers_point_masses(self, point_sketch):
        model = clomp_kmeans(point_sketch, 2, opts=_BOX)
        assert model.k == 2
        # canonical order: heavier component first
        np.testing.assert_allclose(model.centroids, _CENTERS, atol=1e-2)
        np.testing.assert_allclose(model.weights, [0.6, 0.4], atol=1e-2)
        assert model.objective < 1e-4
        assert model.weights.sum() == pytest.approx(1.0)

    def test_deterministic(self, point_sketch):
        a = clomp_kmeans(point_sketch, 2, opts=_BOX)
        b = clomp_kmeans(point_sketch, 2, opts=_BOX)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_box_from_reservoir(self, point_sketch):
        model = clomp_kmeans(point_sketch, 2, opts=SolverOptions(restarts=5))
        lower, upper = point_sketch.box
        assert np.all(model.centroids >= lower - 1e-12) and np.all(model.centroids <= upper + 1e-12)

    def test_single_component(self, point_spec):
        s = sketch_dataset(np.tile([0.5, -0.5], (10, 1)), point_spec)
        model = clomp_kmeans(s, 1, opts=_BOX)
        np.testing.assert_allclose(model.centroids[0], [0.5, -0.5], atol=1e-3)
        np.testing.assert_array_equal(model.weights, [1.0])

    def test_needs_search_box(self, point_spec):
        s = sketch_dataset(_two_point_data(), point_spec, reservoir_size=0)
        with pytest.raises(InvalidArgumentError, match="search box"):
            clomp_kmeans(s, 2)

    def test_k_larger_than_m(self, point_sketch):
        with pytest.raises(InvalidArgumentError):
            clomp_kmeans(point_sketch, 61, opts=_BOX)

    def test_k_zero(self, point_sketch):
        with pytest.raises(InvalidArgumentError):
            clomp_kmeans(point_sketch, 0, opts=_BOX)

    def test_empty_sketch(self, point_spec):
        with pytest.raises(InvalidArgumentError):
            clomp_kmeans(Sketch.empty(point_spec), 2, opts=_BOX)

    def test_wrong_map(self, small_data, quadratic_spec):
        with pytest.raises(IncompatibleSketchError):
            clomp_kmeans(sketch_dataset(small_data, quadratic_spec), 2, opts=SolverOptions(lower=(-1,) * 3, upper=(1,) * 3))

    def test_quantized_sketch(self):
        spec = FeatureMapSpec.create(MapKind.RFF_QUANTIZED, d=2, m=400, sigma_w=0.3, seed=4)
        s = sketch_dataset(_two_point_data(), spec)
        model = clomp_kmeans(s, 2, opts=_BOX)
        np.testing.assert_allclose(model.centroids, _CENTERS, atol=0.2)


@pytest.fixture
def compact_blobs():
    """Three clusters 2.4 apart packed into [−2, 2]²."""
    return synth_gmm(SyntheticSpec(k=3, d=2, n=3000, separation=8.0, sigma=0.3, box_half_width=2.0, seed=3))


def _grid(lo: float, hi: float, size: int) -> np.ndarray:
    axis = np.linspace(lo, hi, size)
    c1, c2 = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([c1.ravel(), c2.ravel()])


class TestSelectionCriterion:
    def test_matches_atom_correlation(self, point_sketch):
        c = np.array([0.3, -0.2])
        expected = np.vdot(DiracFamily(point_sketch.spec.frequencies, -np.ones(2), np.ones(2)).atom(c), point_sketch.values)
        assert selection_criterion(point_sketch, c)[0] == pytest.approx(expected.real / point_sketch.m)

    def test_tracks_parzen_estimate(self, compact_blobs):
        spec = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=2000, sigma_w=0.5, seed=6)
        s = sketch_dataset(compact_blobs.data, spec)
        points = _grid(-3.5, 3.5, 40)
        criterion = selection_criterion(s, points)
        parzen = parzen_score(compact_blobs.data, points, kernel_width(0.5))
        assert np.corrcoef(criterion, parzen)[0, 1] > 0.95

    @pytest.mark.parametrize(
        ("sigma_w", "m", "size", "fewest", "most"),
        [(3.0, 1000, 60, 11, None), (0.5, 4000, 30, 3, 3), (0.05, 4000, 30, 1, 1)],
    )
    def test_frequency_scale_sets_number_of_peaks(self, compact_blobs, sigma_w, m, size, fewest, most):
        spec = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=m, sigma_w=sigma_w, seed=6)
        s = sketch_dataset(compact_blobs.data, spec)
        peaks = count_local_maxima(selection_criterion(s, _grid(-3.5, 3.5, size)).reshape(size, size))
        assert peaks >= fewest
        assert most is None or peaks <= most

    def test_quantized_sketch_is_decoded(self):
        spec = FeatureMapSpec.create(MapKind.RFF_QUANTIZED, d=2, m=2000, sigma_w=0.3, seed=4)
        s = sketch_dataset(_two_point_data(), spec)
        scores = selection_criterion(s, _CENTERS)
        assert scores[0] > scores[1] > selection_criterion(s, np.zeros(2))[0]

    def test_wrong_width(self, point_sketch):
        with pytest.raises(InvalidArgumentError):
            selection_criterion(point_sketch, np.zeros(3))


@pytest.mark.slow
class TestClompOnMixtures:
    def test_kmeans_close_to_lloyd(self, three_blobs, blob_sketch):
        model = clomp_kmeans(blob_sketch, 3)
        reference = lloyd_kmeans(three_blobs.data, 3, seed=0)
        ratio = empirical_risk(Task.KMEANS, model, three_blobs.data) / empirical_risk(
            Task.KMEANS, reference, three_blobs.data
        )
        assert ratio < 1.2

    def test_gmm_recovers_means(self, three_blobs, blob_sketch):
        model = clomp_gmm(blob_sketch, 3)
        truth = three_blobs.truth.means
        for mean in truth:
            assert np.min(np.linalg.norm(model.means - mean, axis=1)) < 0.3
        np.testing.assert_allclose(np.sort(model.weights), np.sort(three_blobs.truth.weights), atol=0.1)
        assert np.all(model.variances > 0)

    def test_gmm_variances_after_matching(self, three_blobs):
        spec = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=2, m=300, sigma_w=0.35, seed=1)
        model = clomp_gmm(sketch_dataset(three_blobs.data, spec, seed=0), 3)
        truth = three_blobs.truth
        rows, cols = linear_sum_assignment(cdist(truth.means, model.means))
        np.testing.assert_allclose(model.variances[cols], truth.variances[rows], rtol=0.15)

    def test_quantized_close_to_complex(self, three_blobs):
        m = 60
        risks = {}
        for kind, size in ((MapKind.RFF_COMPLEX, m), (MapKind.RFF_QUANTIZED, int(1.25 * m))):
            spec = FeatureMapSpec.create(kind, d=2, m=size, sigma_w=0.35, seed=1)
            model = clomp_kmeans(sketch_dataset(three_blobs.data, spec, seed=0), 3)
            risks[kind] = empirical_risk(Task.KMEANS, model, three_blobs.data)
        assert risks[MapKind.RFF_QUANTIZED] <= 1.1 * risks[MapKind.RFF_COMPLEX]

    def test_ten_clusters_in_ten_dimensions(self):
        data = synth_gmm(SyntheticSpec(k=10, d=10, n=10_000, seed=11)).data
        reference = empirical_risk(Task.KMEANS, lloyd_kmeans(data, 10, seed=0), data)
        sigma_w = 1.0 / (2 * np.pi * 6.0)
        ratios = []
        for seed in range(5):
            spec = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=10, m=1000, sigma_w=sigma_w, seed=seed)
            model = clomp_kmeans(sketch_dataset(data, spec, seed=seed), 10, opts=SolverOptions(seed=seed))
            ratios.append(empirical_risk(Task.KMEANS, model, data) / reference)
        assert min(ratios) <= 1.2
