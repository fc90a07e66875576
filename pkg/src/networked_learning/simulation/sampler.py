"""Drawing G-networked samples.

Features are drawn once per vertex, so edges that share a vertex share that
feature block exactly; labels are drawn independently per edge given the
composed features, duplicate edges included.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.hypergraph import KPartiteHypergraph
from .models import GenerativeModel, NetworkedSample, SimulationError
from .rng import StreamFactory

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Many independent networked samples on one hypergraph."""
    features: np.ndarray               # (trials, m, d)
    labels: np.ndarray                 # (trials, m)
    atom_index: Optional[np.ndarray]   # (trials, m, k) for all-discrete models


def _check_dimensions(graph: KPartiteHypergraph, model: GenerativeModel) -> None:
    if graph.k != model.k:
        raise SimulationError(f"hypergraph has k={graph.k} partitions, model has {model.k}")


def sample_networked(graph: KPartiteHypergraph, model: GenerativeModel, seed: int) -> NetworkedSample:
    """Draw one networked sample.

    Vertex (i, j) reads its feature from stream ("vertex", i, j) and edge e
    its label from stream ("label", e), so the sample is reproducible from
    the seed.

    Args:
        graph: Hypergraph
        model: Generative model with k matching the hypergraph
        seed: 64-bit seed

    Returns:
        NetworkedSample with per-vertex features and composed edge examples

    Raises:
        SimulationError: On a partition-count mismatch
    """
    _check_dimensions(graph, model)
    streams = StreamFactory(seed)

    vertex_features, vertex_atoms = [], []
    for i, dist in enumerate(model.partitions):
        values = np.empty((graph.partition_sizes[i], dist.dimension))
        atoms = np.zeros(graph.partition_sizes[i], dtype=int)
        for j in range(graph.partition_sizes[i]):
            drawn, index = dist.sample(streams.stream("vertex", i, j), (1,))
            values[j] = drawn[0]
            if index is not None:
                atoms[j] = index[0]
        vertex_features.append(values)
        vertex_atoms.append(atoms)

    comps = np.asarray(graph.edges, dtype=int).reshape(graph.m, graph.k)
    features = np.concatenate(
        [vertex_features[i][comps[:, i]] for i in range(graph.k)], axis=-1
    ) if graph.m else np.empty((0, model.dimension))
    discrete = all(p.is_discrete for p in model.partitions)
    atom_index = np.stack([vertex_atoms[i][comps[:, i]] for i in range(graph.k)], axis=-1) if discrete else None

    labels = np.empty(graph.m)
    for e in range(graph.m):
        key = atom_index[e:e + 1] if atom_index is not None else None
        labels[e] = model.label.sample(features[e:e + 1], key, streams.stream("label", e))[0]

    for values in vertex_features:
        values.flags.writeable = False
    return NetworkedSample(features, labels, tuple(vertex_features), seed)


def draw_batch(graph: KPartiteHypergraph, model: GenerativeModel, rng: np.random.Generator, trials: int) -> SampleBatch:
    """Draw `trials` independent networked samples in one vectorized pass.

    Args:
        graph: Hypergraph
        model: Generative model
        rng: Stream for this batch
        trials: Number of samples

    Returns:
        SampleBatch
    """
    _check_dimensions(graph, model)
    comps = np.asarray(graph.edges, dtype=int).reshape(graph.m, graph.k)
    blocks, atoms = [], []
    for i, dist in enumerate(model.partitions):
        values, index = dist.sample(rng, (trials, graph.partition_sizes[i]))
        blocks.append(values[:, comps[:, i], :])
        atoms.append(None if index is None else index[:, comps[:, i]])
    features = np.concatenate(blocks, axis=-1)
    atom_index = np.stack(atoms, axis=-1) if all(a is not None for a in atoms) else None
    labels = model.label.sample(features, atom_index, rng)
    return SampleBatch(features, labels, atom_index)
