"""Tests for weighted ERM and risk estimation."""

import numpy as np
import pytest

from networked_learning.core.weighting import Weighting, WeightingMethod
from networked_learning.learning.erm import (
    Hypothesis,
    LearnerError,
    empirical_risk,
    empirical_weighted_risk,
    expected_risk_estimate,
    project_l1_ball,
    risk_report,
    sample_error_estimate,
    weighted_erm,
)
from networked_learning.simulation.models import (
    FeatureDistribution,
    GenerativeModel,
    LabelKind,
    LabelModel,
    NetworkedSample,
    NoiseKind,
    NoiseModel,
)


def weighting(weights, normalizer=None):
    weights = tuple(float(w) for w in weights)
    return Weighting(WeightingMethod.OPT, weights, sum(weights) if normalizer is None else normalizer)


def random_instance(rng, m=40, d=3, noise=0.1):
    features = rng.standard_normal((m, d))
    beta = rng.uniform(-1, 1, d)
    labels = features @ beta + noise * rng.standard_normal(m)
    return NetworkedSample(features, labels), weighting(rng.uniform(0.2, 1.0, m))


def random_ball_point(rng, d, radius):
    v = rng.standard_normal(d)
    return v / np.abs(v).sum() * radius * rng.uniform()


@pytest.fixture
def two_point():
    sample = NetworkedSample([[1.0], [1.0]], [1.0, 0.0])
    return sample, weighting([1.0, 0.5])


@pytest.fixture
def linear_model():
    return GenerativeModel((FeatureDistribution.uniform(2),), LabelModel(LabelKind.LINEAR, [0.5, -0.5]))


class TestProjectL1Ball:
    """Test the Euclidean projection onto the l1-ball."""

    def test_inside_ball_unchanged(self):
        v = np.array([0.2, -0.3])
        np.testing.assert_array_equal(project_l1_ball(v, 1.0), v)

    def test_hand_example(self):
        np.testing.assert_allclose(project_l1_ball(np.array([3.0, -1.0]), 2.0), [2.0, 0.0])

    def test_zero_radius(self):
        np.testing.assert_array_equal(project_l1_ball(np.array([1.0, -2.0]), 0.0), [0.0, 0.0])

    def test_projection_is_closest_point(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = rng.standard_normal(4) * 3
            p = project_l1_ball(v, 1.0)
            assert np.abs(p).sum() <= 1.0 + 1e-12
            for _ in range(20):
                q = random_ball_point(rng, 4, 1.0)
                assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-12

    def test_negative_radius(self):
        with pytest.raises(LearnerError):
            project_l1_ball(np.ones(2), -1.0)


class TestHypothesis:
    """Test the immutable linear predictor."""

    def test_norm_bound_enforced(self):
        with pytest.raises(LearnerError, match="exceeds"):
            Hypothesis([2.0], 1.0)

    def test_coefficients_read_only(self):
        h = Hypothesis([0.5, 0.25], 1.0)
        with pytest.raises(ValueError):
            h.coefficients[0] = 1.0

    def test_predict_dimension_mismatch(self):
        with pytest.raises(LearnerError, match="dimension"):
            Hypothesis([0.5], 1.0).predict(np.ones((3, 2)))

    def test_to_dict(self):
        data = Hypothesis([0.5], 1.0).to_dict()
        assert data["coefficients"] == [0.5]
        assert data["path"] == "closed_form"


class TestWeightedErm:
    """Test the weighted least-squares fit."""

    def test_two_point_example(self, two_point):
        sample, w = two_point
        f = weighted_erm(sample, w, R=10.0)
        assert f.coefficients[0] == pytest.approx(2.0 / 3.0, abs=1e-8)
        assert empirical_weighted_risk(f, sample, w) == pytest.approx(2.0 / 9.0, abs=1e-12)

    def test_two_point_by_projected_gradient(self, two_point):
        sample, w = two_point
        f = weighted_erm(sample, w, R=10.0, method="projected_gradient")
        assert f.path == "projected_gradient"
        assert f.coefficients[0] == pytest.approx(2.0 / 3.0, abs=1e-8)

    def test_single_example(self):
        sample = NetworkedSample([[1.0]], [0.5])
        f = weighted_erm(sample, weighting([1.0]), R=1.0)
        assert f.coefficients[0] == pytest.approx(0.5)

    def test_planted_model_recovered(self):
        rng = np.random.default_rng(1)
        features = rng.random((20, 3))
        beta = np.array([0.5, -0.3, 0.1])
        sample = NetworkedSample(features, features @ beta)
        w = weighting([1.0, 0.0] * 10)
        f = weighted_erm(sample, w, R=1.0)
        np.testing.assert_allclose(f.coefficients, beta, atol=1e-8)
        assert empirical_weighted_risk(f, sample, w) <= 1e-16

    def test_closed_form_and_projected_gradient_agree(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            sample, w = random_instance(rng)
            closed = weighted_erm(sample, w, R=100.0, method="closed_form")
            iterative = weighted_erm(sample, w, R=100.0, method="projected_gradient", tol=1e-10)
            np.testing.assert_allclose(iterative.coefficients, closed.coefficients, atol=1e-8)
            assert closed.stationarity <= 1e-8

    def test_binding_ball_is_stationary(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            features = rng.standard_normal((30, 3))
            sample = NetworkedSample(features, features @ np.array([2.0, -1.5, 1.0]))
            w = weighting(rng.uniform(0.2, 1.0, 30))
            f = weighted_erm(sample, w, R=1.0)
            assert f.path == "projected_gradient"
            assert f.stationarity <= 1e-8
            assert np.abs(f.coefficients).sum() == pytest.approx(1.0, abs=1e-9)

    def test_closed_form_outside_ball_rejected(self):
        sample = NetworkedSample([[1.0]], [5.0])
        with pytest.raises(LearnerError, match="> R"):
            weighted_erm(sample, weighting([1.0]), R=1.0, method="closed_form")

    def test_scaling_weights_keeps_argmin(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            sample, w = random_instance(rng)
            scaled = Weighting(w.method, tuple(3.7 * x for x in w.weights), 3.7 * w.normalizer)
            for radius in (100.0, 0.5):
                a = weighted_erm(sample, w, R=radius, tol=1e-11)
                b = weighted_erm(sample, scaled, R=radius, tol=1e-11)
                np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-8)

    def test_all_ones_matches_least_squares(self):
        rng = np.random.default_rng(5)
        features = rng.standard_normal((25, 4))
        labels = rng.standard_normal(25)
        f = weighted_erm(NetworkedSample(features, labels), weighting([1.0] * 25), R=1000.0)
        ols, *_ = np.linalg.lstsq(features, labels, rcond=None)
        np.testing.assert_allclose(f.coefficients, ols, atol=1e-8)

    def test_beats_random_feasible_candidates(self):
        rng = np.random.default_rng(6)
        sample, w = random_instance(rng, noise=0.5)
        f = weighted_erm(sample, w, R=0.8)
        best = empirical_weighted_risk(f, sample, w)
        for _ in range(100):
            candidate = Hypothesis(random_ball_point(rng, sample.dimension, 0.8), 0.8)
            assert best <= empirical_weighted_risk(candidate, sample, w) + 1e-12

    def test_deterministic(self):
        sample, w = random_instance(np.random.default_rng(7))
        first = weighted_erm(sample, w, R=0.5)
        second = weighted_erm(sample, w, R=0.5)
        assert first.coefficients.tobytes() == second.coefficients.tobytes()

    def test_zero_total_weight(self, two_point):
        sample, _ = two_point
        with pytest.raises(LearnerError, match="total weight"):
            weighted_erm(sample, Weighting(WeightingMethod.IND, (0.0, 0.0), 0.0), R=1.0)

    def test_length_mismatch(self, two_point):
        sample, _ = two_point
        with pytest.raises(LearnerError, match="entries"):
            weighted_erm(sample, weighting([1.0]), R=1.0)

    def test_invalid_method_and_radius(self, two_point):
        sample, w = two_point
        with pytest.raises(LearnerError, match="unknown"):
            weighted_erm(sample, w, R=1.0, method="newton")
        with pytest.raises(LearnerError, match="positive"):
            weighted_erm(sample, w, R=0.0)


class TestEmpiricalRisk:
    """Test weighted and unweighted empirical risks."""

    def test_perfect_predictor(self, two_point):
        sample = NetworkedSample([[1.0], [2.0]], [0.5, 1.0])
        assert empirical_weighted_risk(Hypothesis([0.5], 1.0), sample, weighting([1.0, 1.0])) == 0.0

    def test_equal_weights_give_ordinary_risk(self):
        rng = np.random.default_rng(8)
        sample, _ = random_instance(rng)
        f = Hypothesis([0.1, 0.2, 0.3], 1.0)
        assert empirical_weighted_risk(f, sample, weighting([1.0] * sample.m)) == pytest.approx(
            empirical_risk(f, sample), rel=1e-12
        )

    def test_zero_normalizer(self, two_point):
        sample, _ = two_point
        with pytest.raises(LearnerError):
            empirical_weighted_risk(Hypothesis([0.5], 1.0), sample, Weighting(WeightingMethod.IND, (1.0, 0.0), 0.0))


class TestRiskEstimates:
    """Test Monte Carlo expected-risk and sample-error estimates."""

    def test_noise_free_target_has_zero_risk(self, linear_model):
        estimate = expected_risk_estimate(Hypothesis([0.5, -0.5], 1.0), linear_model, 1000, seed=0)
        assert estimate.estimate == pytest.approx(0.0, abs=1e-24)
        assert estimate.standard_error == pytest.approx(0.0, abs=1e-24)

    def test_coin_labels_have_unit_second_moment(self):
        noise = NoiseModel(NoiseKind.DISCRETE, atoms=[-1.0, 1.0], probabilities=[0.5, 0.5])
        model = GenerativeModel((FeatureDistribution.uniform(1),), LabelModel(LabelKind.LINEAR, [0.0], noise))
        estimate = expected_risk_estimate(Hypothesis([0.0], 1.0), model, 500, seed=1)
        assert estimate.estimate == pytest.approx(1.0)

    def test_uniform_noise_variance(self):
        noise = NoiseModel(NoiseKind.UNIFORM, half_width=0.1)
        model = GenerativeModel((FeatureDistribution.uniform(2),), LabelModel(LabelKind.LINEAR, [0.5, -0.5], noise))
        estimate = expected_risk_estimate(Hypothesis([0.5, -0.5], 1.0), model, 20000, seed=2)
        assert abs(estimate.estimate - 1.0 / 300.0) <= 4 * estimate.standard_error

    def test_reproducible(self, linear_model):
        f = Hypothesis([0.2, 0.1], 1.0)
        assert expected_risk_estimate(f, linear_model, 100, 5) == expected_risk_estimate(f, linear_model, 100, 5)

    def test_n_test_too_small(self, linear_model):
        with pytest.raises(LearnerError, match="n_test"):
            expected_risk_estimate(Hypothesis([0.0, 0.0], 1.0), linear_model, 1, seed=0)

    def test_sample_error_of_reference_is_zero(self, linear_model):
        f = Hypothesis([0.3, 0.2], 1.0)
        estimate = sample_error_estimate(f, f, linear_model, 500, seed=3)
        assert estimate.estimate == 0.0
        assert estimate.standard_error == 0.0

    def test_sample_error_is_non_negative_against_target(self, linear_model):
        target = Hypothesis([0.5, -0.5], 1.0)
        estimate = sample_error_estimate(Hypothesis([0.2, 0.1], 1.0), target, linear_model, 2000, seed=4)
        assert estimate.estimate > 0


class TestRiskReport:
    """Test the combined risk report."""

    def test_without_model(self, two_point):
        sample, w = two_point
        report = risk_report(Hypothesis([2.0 / 3.0], 1.0), sample, w)
        data = report.to_dict()
        assert data["empirical_weighted"] == pytest.approx(2.0 / 9.0)
        assert data["empirical_unweighted"] == pytest.approx(((1 / 3) ** 2 + (2 / 3) ** 2) / 2)
        assert data["expected_estimate"] is None
        assert data["expected_standard_error"] is None

    def test_with_model(self, linear_model):
        sample = NetworkedSample([[0.5, 0.5]], [0.0])
        report = risk_report(Hypothesis([0.5, -0.5], 1.0), sample, weighting([1.0]), linear_model, 100, 0)
        assert report.expected.estimate == pytest.approx(0.0, abs=1e-24)
