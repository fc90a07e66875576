"""Tests for generative models and networked samples."""

import numpy as np
import pytest

from networked_learning.simulation.models import (
    FeatureDistribution,
    GenerativeModel,
    LabelKind,
    LabelModel,
    ModelError,
    NetworkedSample,
    NoiseKind,
    NoiseModel,
    SimulationError,
)

UNIFORM_CONFIG = {
    "partitions": [{"kind": "uniform", "dimension": 2}, {"kind": "uniform", "dimension": 1}],
    "label": {"kind": "linear", "coefficients": [0.5, -0.25, 0.25], "noise": {"kind": "uniform", "half_width": 0.1}},
}

TABLE_CONFIG = {
    "partitions": [
        {"kind": "discrete", "atoms": [[0.0], [1.0]], "probabilities": [0.5, 0.5]},
        {"kind": "discrete", "atoms": [[0.0], [1.0]], "probabilities": [0.25, 0.75]},
    ],
    "label": {
        "kind": "table",
        "table": [
            {"atoms": [0, 0], "values": [0.0], "probabilities": [1.0]},
            {"atoms": [0, 1], "values": [-1.0, 1.0], "probabilities": [0.5, 0.5]},
            {"atoms": [1, 0], "values": [2.0], "probabilities": [1.0]},
            {"atoms": [1, 1], "values": [-3.0, 1.0], "probabilities": [0.1, 0.9]},
        ],
    },
}


class TestFeatureDistribution:
    """Test per-partition feature distributions."""

    def test_uniform(self):
        dist = FeatureDistribution.uniform(3)
        values, index = dist.sample(np.random.default_rng(0), (5,))
        assert values.shape == (5, 3)
        assert index is None
        assert np.all((values >= 0) & (values < 1))

    def test_discrete_sampling_returns_atoms(self):
        dist = FeatureDistribution.discrete([[0.0, 1.0], [2.0, 3.0]], [0.5, 0.5])
        values, index = dist.sample(np.random.default_rng(1), (4, 6))
        assert values.shape == (4, 6, 2)
        np.testing.assert_array_equal(values, dist.atoms[index])

    def test_zero_probability_atom_never_drawn(self):
        dist = FeatureDistribution.discrete([[0.0], [1.0], [2.0]], [0.5, 0.0, 0.5])
        _, index = dist.sample(np.random.default_rng(2), (10000,))
        assert not np.any(index == 1)

    @pytest.mark.parametrize("probabilities", [[0.5, 0.6], [1.5, -0.5], [1.0]])
    def test_invalid_probabilities(self, probabilities):
        with pytest.raises(ModelError):
            FeatureDistribution.discrete([[0.0], [1.0]], probabilities)

    def test_linear_moments(self):
        uniform = FeatureDistribution.uniform(2).linear_moments(np.array([1.0, -2.0]))
        assert (uniform.mean, uniform.low, uniform.high) == (-0.5, -2.0, 1.0)
        assert uniform.variance == pytest.approx(5.0 / 12.0)
        coin = FeatureDistribution.discrete([[0.0], [1.0]], [0.5, 0.5]).linear_moments(np.array([2.0]))
        assert (coin.mean, coin.variance, coin.low, coin.high) == (1.0, 1.0, 0.0, 2.0)


class TestNoiseAndLabels:
    """Test noise and label models."""

    def test_uniform_noise_moments(self):
        moments = NoiseModel(NoiseKind.UNIFORM, half_width=0.1).moments()
        assert moments.variance == pytest.approx(0.01 / 3.0)
        assert (moments.low, moments.high) == (-0.1, 0.1)

    def test_uniform_noise_needs_width(self):
        with pytest.raises(ModelError, match="half_width"):
            NoiseModel(NoiseKind.UNIFORM)

    def test_uniform_noise_has_no_support(self):
        with pytest.raises(ModelError):
            NoiseModel(NoiseKind.UNIFORM, half_width=1.0).support()

    def test_linear_label_needs_coefficients(self):
        with pytest.raises(ModelError, match="coefficients"):
            LabelModel(LabelKind.LINEAR)

    def test_table_label_needs_table(self):
        with pytest.raises(ModelError, match="table"):
            LabelModel(LabelKind.TABLE)

    def test_linear_conditional(self):
        noise = NoiseModel(NoiseKind.DISCRETE, atoms=[-1.0, 1.0], probabilities=[0.5, 0.5])
        values, p = LabelModel(LabelKind.LINEAR, [2.0], noise).conditional(np.array([1.5]), None)
        np.testing.assert_allclose(values, [2.0, 4.0])
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_table_labels_follow_keys(self):
        model = GenerativeModel.from_config(TABLE_CONFIG)
        atoms = np.array([[1, 0]] * 50)
        labels = model.label.sample(np.zeros((50, 2)), atoms, np.random.default_rng(3))
        assert np.all(labels == 2.0)


class TestGenerativeModel:
    """Test model construction and derived quantities."""

    def test_from_config(self):
        model = GenerativeModel.from_config(UNIFORM_CONFIG, seed=9)
        assert model.k == 2
        assert model.dimension == 3
        assert model.block_slices() == [slice(0, 2), slice(2, 3)]
        assert not model.is_discrete
        assert model.seed == 9

    def test_label_bound(self):
        model = GenerativeModel.from_config(UNIFORM_CONFIG)
        assert model.label_bound() == pytest.approx(0.75 + 0.1)
        assert GenerativeModel.from_config(TABLE_CONFIG).label_bound() == 3.0

    def test_target_coefficients(self):
        np.testing.assert_array_equal(GenerativeModel.from_config(UNIFORM_CONFIG).target_coefficients(), [0.5, -0.25, 0.25])
        with pytest.raises(ModelError, match="linear"):
            GenerativeModel.from_config(TABLE_CONFIG).target_coefficients()

    def test_biased_noise_has_no_linear_target(self):
        noise = NoiseModel(NoiseKind.DISCRETE, atoms=[1.0], probabilities=[1.0])
        model = GenerativeModel((FeatureDistribution.uniform(1),), LabelModel(LabelKind.LINEAR, [1.0], noise))
        with pytest.raises(ModelError, match="zero mean"):
            model.target_coefficients()

    def test_coefficient_length_mismatch(self):
        with pytest.raises(ModelError, match="length"):
            GenerativeModel((FeatureDistribution.uniform(2),), LabelModel(LabelKind.LINEAR, [1.0]))

    def test_table_needs_discrete_partitions(self):
        label = LabelModel(LabelKind.TABLE, table={(0,): ([1.0], [1.0])})
        with pytest.raises(ModelError, match="discrete"):
            GenerativeModel((FeatureDistribution.uniform(1),), label)

    def test_table_key_out_of_range(self):
        coin = FeatureDistribution.discrete([[0.0], [1.0]], [0.5, 0.5])
        label = LabelModel(LabelKind.TABLE, table={(2,): ([1.0], [1.0])})
        with pytest.raises(ModelError, match="does not index"):
            GenerativeModel((coin,), label)

    def test_sample_iid(self):
        model = GenerativeModel.from_config(UNIFORM_CONFIG)
        features, labels = model.sample_iid(1000, np.random.default_rng(4))
        assert features.shape == (1000, 3)
        residual = labels - features @ np.array([0.5, -0.25, 0.25])
        assert np.all(np.abs(residual) <= 0.1)


class TestNetworkedSample:
    """Test the sample container and its CSV form."""

    def test_csv_round_trip_is_exact(self):
        rng = np.random.default_rng(5)
        sample = NetworkedSample(rng.random((4, 3)), rng.standard_normal(4))
        parsed = NetworkedSample.from_csv(sample.to_csv())
        assert parsed.features.tobytes() == sample.features.tobytes()
        assert parsed.labels.tobytes() == sample.labels.tobytes()

    def test_rows_in_any_order(self):
        parsed = NetworkedSample.from_csv("1,0.5,1\n0,0.25,0\n")
        np.testing.assert_array_equal(parsed.features, [[0.25], [0.5]])
        np.testing.assert_array_equal(parsed.labels, [0.0, 1.0])

    def test_header_and_comments_skipped(self):
        parsed = NetworkedSample.from_csv("edge_index,x_1,y\n# note\n0,1,2\n")
        assert parsed.m == 1

    def test_missing_edge_index(self):
        with pytest.raises(SimulationError, match="0..2"):
            NetworkedSample.from_csv("0,1,2\n2,1,2\n", m=3)

    def test_duplicate_edge_index(self):
        with pytest.raises(SimulationError, match="duplicate"):
            NetworkedSample.from_csv("0,1,2\n0,1,2\n")

    def test_inconsistent_width(self):
        with pytest.raises(SimulationError, match="line 2"):
            NetworkedSample.from_csv("0,1,2\n1,1,2,3\n")

    def test_non_numeric_row(self):
        with pytest.raises(SimulationError, match="line 2"):
            NetworkedSample.from_csv("0,1,2\n1,a,2\n")

    def test_empty(self):
        with pytest.raises(SimulationError, match="no rows"):
            NetworkedSample.from_csv("edge_index,x_1,y\n")

    def test_length_mismatch(self):
        with pytest.raises(SimulationError, match="labels"):
            NetworkedSample([[1.0], [2.0]], [1.0])

    def test_read_only(self):
        sample = NetworkedSample([[1.0]], [2.0])
        with pytest.raises(ValueError):
            sample.features[0, 0] = 3.0
