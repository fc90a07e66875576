"""Shared fixtures: canonical hypergraphs, small discrete models and a clean configuration."""

import pytest

from networked_learning.core.hypergraph import KPartiteHypergraph
from networked_learning.simulation.models import (
    FeatureDistribution,
    GenerativeModel,
    LabelKind,
    LabelModel,
)
from networked_learning.utils.config import set_config

DISJOINT_TEXT = "2 3\n3 3\n0 0\n1 1\n2 2\n"
STAR_TEXT = "2 4\n1 4\n0 0\n0 1\n0 2\n0 3\n"
C5_TEXT = """# five edges whose overlap graph is a 5-cycle
3 5
4 3 3
0 0 0
0 1 1
1 1 2
2 2 2
3 2 0
"""


@pytest.fixture(autouse=True)
def clean_config(monkeypatch):
    """Every test starts from default settings without environment overrides."""
    for variable in (
        "NETWORKED_LEARNING_ALPHA_CAP",
        "NETWORKED_LEARNING_CHI_CAP",
        "NETWORKED_LEARNING_ENUMERATION_CAP",
        "NETWORKED_LEARNING_WORKERS",
    ):
        monkeypatch.delenv(variable, raising=False)
    set_config(None)
    yield
    set_config(None)


@pytest.fixture
def disjoint3():
    return KPartiteHypergraph(2, (3, 3), ((0, 0), (1, 1), (2, 2)))


@pytest.fixture
def star4():
    return KPartiteHypergraph(2, (1, 4), ((0, 0), (0, 1), (0, 2), (0, 3)))


@pytest.fixture
def c5():
    return KPartiteHypergraph(3, (4, 3, 3), ((0, 0, 0), (0, 1, 1), (1, 1, 2), (2, 2, 2), (3, 2, 0)))


@pytest.fixture
def coin_model():
    """Two partitions of fair 0/1 coins and the deterministic label y = 0."""
    coin = FeatureDistribution.discrete([[0.0], [1.0]], [0.5, 0.5])
    return GenerativeModel((coin, coin), LabelModel(LabelKind.LINEAR, [0.0, 0.0]))


@pytest.fixture
def hypergraph_files(tmp_path):
    """The canonical instances written to disk."""
    paths = {}
    for name, text in (("disjoint", DISJOINT_TEXT), ("star", STAR_TEXT), ("c5", C5_TEXT)):
        path = tmp_path / f"{name}.txt"
        path.write_text(text)
        paths[name] = path
    return paths
