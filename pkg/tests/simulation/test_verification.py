"""Tests for the exact MGF check and the concavity check."""

import math

import numpy as np
import pytest

from networked_learning.core.generators import random_hypergraph
from networked_learning.core.hypergraph import KPartiteHypergraph
from networked_learning.core.weighting import optimal_weighting, verify_feasible
from networked_learning.simulation.models import (
    FeatureDistribution,
    GenerativeModel,
    LabelKind,
    LabelModel,
    NoiseKind,
    NoiseModel,
    SimulationError,
)
from networked_learning.simulation.statistics import StatisticSpec
from networked_learning.simulation.verification import (
    EnumerationTooLargeError,
    concavity_check,
    exact_mgf_check,
    weighted_geometric_mean,
)
from networked_learning.utils.config import Config, set_config

CENTERED = StatisticSpec("affine", [2.0, 2.0], offset=-2.0)


def random_discrete_model(rng, k):
    partitions = []
    for _ in range(k):
        atoms = int(rng.integers(1, 4))
        partitions.append(FeatureDistribution.discrete(rng.uniform(-1, 1, (atoms, 1)), rng.dirichlet(np.ones(atoms))))
    noise_atoms = int(rng.integers(1, 3))
    noise = NoiseModel(NoiseKind.DISCRETE, atoms=rng.uniform(-0.5, 0.5, noise_atoms), probabilities=rng.dirichlet(np.ones(noise_atoms)))
    return GenerativeModel(tuple(partitions), LabelModel(LabelKind.LINEAR, rng.uniform(-1, 1, k), noise))


def random_feasible_weights(graph, rng):
    """Random weights scaled so that the heaviest vertex carries at most 1."""
    w = rng.random(graph.m) * (rng.random(graph.m) < 0.8)
    loads = [sum(w[i] for i in members) for members in graph.incidence().values()]
    if max(loads) > 0:
        w = w / max(loads) * rng.uniform(0.5, 1.0)
    return w


class TestExactMgfCheck:
    """Test both sides of the weighted MGF inequality."""

    def test_zero_weights(self, c5):
        model = GenerativeModel(
            tuple(FeatureDistribution.discrete([[0.0], [1.0]], [0.5, 0.5]) for _ in range(3)),
            LabelModel(LabelKind.LINEAR, [1.0, 1.0, 1.0]),
        )
        lhs, rhs = exact_mgf_check(c5, model, StatisticSpec("affine", [1.0, 1.0, 1.0]), [0.0] * 5)
        assert lhs == pytest.approx(1.0, abs=1e-12)
        assert rhs == 1.0

    def test_disjoint_zero_one_weights_factorize(self, disjoint3, coin_model):
        comparison = exact_mgf_check(disjoint3, coin_model, CENTERED, [1.0, 1.0, 0.0])
        assert comparison.rhs == pytest.approx(math.cosh(1.0) ** 4, rel=1e-12)
        assert comparison.lhs == pytest.approx(comparison.rhs, rel=1e-12)
        assert comparison.holds

    def test_star_quarter_weights(self, star4, coin_model):
        comparison = exact_mgf_check(star4, coin_model, CENTERED, [0.25] * 4)
        assert comparison.lhs == pytest.approx(math.cosh(1.0) * math.cosh(0.25) ** 4, rel=1e-12)
        assert comparison.rhs == pytest.approx(math.cosh(1.0) ** 2, rel=1e-12)
        assert comparison.lhs < comparison.rhs
        assert comparison.configurations == 2 ** 5

    def test_optimal_weights_on_random_instances(self):
        rng = np.random.default_rng(21)
        for trial in range(500):
            k = int(rng.integers(1, 4))
            graph = random_hypergraph(k, int(rng.integers(1, 6)), int(rng.integers(1, 4)), trial)
            model = random_discrete_model(rng, k)
            statistic = StatisticSpec("affine", rng.uniform(-0.5, 0.5, k), label_coefficient=float(rng.uniform(-0.5, 0.5)))
            weights = optimal_weighting(graph).weights if trial % 2 else random_feasible_weights(graph, rng)
            assert verify_feasible(graph, weights)
            assert exact_mgf_check(graph, model, statistic, weights).holds

    def test_table_labels(self, star4):
        coin = FeatureDistribution.discrete([[0.0], [1.0]], [0.5, 0.5])
        table = {key: ([-1.0, 1.0], [0.3, 0.7]) for key in [(0, 0), (0, 1), (1, 0), (1, 1)]}
        model = GenerativeModel((coin, coin), LabelModel(LabelKind.TABLE, table=table))
        statistic = StatisticSpec("squared_loss", [0.5, 0.5])
        assert exact_mgf_check(star4, model, statistic, [0.25] * 4).holds

    def test_infeasible_weights(self, star4, coin_model):
        with pytest.raises(SimulationError, match="infeasible"):
            exact_mgf_check(star4, coin_model, CENTERED, [0.5] * 4)

    def test_continuous_model(self, star4):
        model = GenerativeModel((FeatureDistribution.uniform(1),) * 2, LabelModel(LabelKind.LINEAR, [1.0, 1.0]))
        with pytest.raises(SimulationError, match="discrete"):
            exact_mgf_check(star4, model, CENTERED, [0.25] * 4)

    def test_partition_mismatch(self, c5, coin_model):
        with pytest.raises(SimulationError, match="partitions"):
            exact_mgf_check(c5, coin_model, CENTERED, [0.0] * 5)

    def test_empty_graph(self, coin_model):
        with pytest.raises(SimulationError, match="at least one"):
            exact_mgf_check(KPartiteHypergraph(2, (1, 1), ()), coin_model, CENTERED, [])

    def test_enumeration_cap(self, star4, coin_model):
        with pytest.raises(EnumerationTooLargeError) as info:
            exact_mgf_check(star4, coin_model, CENTERED, [0.25] * 4, cap=16)
        assert info.value.size == 32
        assert info.value.cap == 16

    def test_enumeration_cap_from_config(self, star4, coin_model):
        config = Config(use_env=False)
        config.set("enumeration_cap", 8)
        set_config(config)
        with pytest.raises(SimulationError):
            exact_mgf_check(star4, coin_model, CENTERED, [0.25] * 4)


class TestConcavityCheck:
    """Test concavity of weighted geometric means."""

    def test_random_exponents(self):
        rng = np.random.default_rng(3)
        for index in range(20):
            k = int(rng.integers(1, 6))
            beta = rng.dirichlet(np.ones(k)) * rng.uniform(0.1, 1.0)
            assert concavity_check(beta, 10_000, seed=index)

    def test_linear_case(self):
        result = concavity_check([1.0], 1000)
        assert result.passed
        assert result.trials == 1000

    def test_constant_case(self):
        assert concavity_check([0.0, 0.0], 1000)

    def test_hand_example(self):
        mixed = weighted_geometric_mean(np.array([2.5, 2.5]), np.array([0.5, 0.5]))
        chord = 0.5 * weighted_geometric_mean(np.array([1.0, 4.0]), np.array([0.5, 0.5])) + 0.5 * weighted_geometric_mean(
            np.array([4.0, 1.0]), np.array([0.5, 0.5])
        )
        assert mixed == pytest.approx(2.5)
        assert chord == pytest.approx(2.0)

    @pytest.mark.parametrize("beta", [[], [-0.1, 0.5], [0.7, 0.7]])
    def test_invalid_exponents(self, beta):
        with pytest.raises(SimulationError, match="beta"):
            concavity_check(beta, 10)

    def test_invalid_trials(self):
        with pytest.raises(SimulationError, match="trials"):
            concavity_check([0.5], 0)
