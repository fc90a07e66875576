"""Deterministic hypergraph families: disjoint, star, cycle and random."""

from typing import List, Optional

import numpy as np

from ..simulation.rng import StreamFactory
from .hypergraph import HypergraphError, KPartiteHypergraph

FAMILIES = ("disjoint", "star", "cycle", "random")


def disjoint_hypergraph(k: int, m: int) -> KPartiteHypergraph:
    """m pairwise disjoint edges (j, j, ..., j); Gamma has no edges."""
    _check_size(k, m, minimum_m=1)
    return KPartiteHypergraph(k, (m,) * k, tuple((j,) * k for j in range(m)))


def star_hypergraph(k: int, m: int) -> KPartiteHypergraph:
    """m edges sharing vertex 0 of partition 0 and otherwise disjoint; Gamma is K_m."""
    _check_size(k, m, minimum_m=1)
    sizes = (1,) + (m,) * (k - 1)
    return KPartiteHypergraph(k, sizes, tuple((0,) + (j,) * (k - 1) for j in range(m)))


def cycle_hypergraph(k: int, m: int) -> KPartiteHypergraph:
    """m edges whose dependency graph is exactly the cycle C_m.

    Consecutive edges i and i+1 (mod m) share one link vertex. Links are
    placed in partitions 0 and 1 alternately, with partition 2 closing an
    odd cycle, so each edge's two links sit in different partitions. Every
    remaining component is a private vertex.
    """
    _check_size(k, m, minimum_m=3)
    if k < 3:
        raise HypergraphError("cycle family needs k >= 3")
    link_partition = [i % 2 for i in range(m)]
    if m % 2 == 1:
        link_partition[-1] = 2

    counters = [0] * k
    link_vertex = []
    for p in link_partition:
        link_vertex.append(counters[p])
        counters[p] += 1

    edges = []
    for i in range(m):
        components: List[Optional[int]] = [None] * k
        before, after = (i - 1) % m, i
        components[link_partition[before]] = link_vertex[before]
        components[link_partition[after]] = link_vertex[after]
        for p in range(k):
            if components[p] is None:
                components[p] = counters[p]
                counters[p] += 1
        edges.append(tuple(components))
    return KPartiteHypergraph(k, tuple(counters), tuple(edges))


def random_hypergraph(k: int, m: int, n: int, seed: int, density: float = 1.0) -> KPartiteHypergraph:
    """m edges whose components come from a shared pool of n vertices per partition.

    Each component is drawn uniformly from the pool with probability
    ``density`` and is otherwise a fresh private vertex, so density 0 gives
    disjoint edges and density 1 draws every component from the pool.

    Args:
        k: Number of partitions
        m: Number of edges
        n: Shared pool size per partition
        seed: RNG seed
        density: Probability that a component is shared, in [0, 1]

    Returns:
        Hypergraph instance; partition p has n + (private components in p) vertices
    """
    _check_size(k, m, minimum_m=1)
    if n < 1:
        raise HypergraphError("partition size n must be positive")
    if not 0.0 <= density <= 1.0:
        raise HypergraphError(f"density must lie in [0, 1], got {density}")
    rng = StreamFactory(seed).stream("generate", "random")
    components = rng.integers(0, n, size=(m, k))
    if density < 1.0:
        private = rng.random((m, k)) >= density
        for p in range(k):
            rows = np.flatnonzero(private[:, p])
            components[rows, p] = n + np.arange(len(rows))
    sizes = tuple(int(max(n, components[:, p].max() + 1)) for p in range(k))
    return KPartiteHypergraph(k, sizes, tuple(tuple(int(c) for c in row) for row in components))


def generate_hypergraph(family: str, k: int, m: int, n: Optional[int] = None, seed: int = 0,
                        density: float = 1.0) -> KPartiteHypergraph:
    """Build a family member by name.

    Args:
        family: One of disjoint, star, cycle, random
        k: Number of partitions
        m: Number of edges
        n: Partition size (random family only; defaults to m)
        seed: RNG seed (random family only)
        density: Shared-component probability (random family only)

    Returns:
        Hypergraph instance
    """
    if family == "disjoint":
        return disjoint_hypergraph(k, m)
    if family == "star":
        return star_hypergraph(k, m)
    if family == "cycle":
        return cycle_hypergraph(k, m)
    if family == "random":
        return random_hypergraph(k, m, n if n is not None else m, seed, density)
    raise HypergraphError(f"unknown family '{family}' (choose from {', '.join(FAMILIES)})")


def _check_size(k: int, m: int, minimum_m: int) -> None:
    if k < 1:
        raise HypergraphError("k must be positive")
    if m < minimum_m:
        raise HypergraphError(f"m must be at least {minimum_m}")
