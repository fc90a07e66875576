"""Per-example weighting schemes: EQW, IND (matchings) and the optimal feasible weighting."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .hypergraph import KPartiteHypergraph, Vertex, build_dependency_graph, maximum_independent_set
from .simplex import solve_packing_lp

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9


class WeightingError(Exception):
    """Raised for invalid weighting requests or weight vectors."""
    pass


class WeightingMethod(Enum):
    """Supported weighting schemes."""
    EQW = "eqw"
    IND = "ind"
    OPT = "opt"


@dataclass(frozen=True)
class Weighting:
    """A per-edge weight vector.

    normalizer is m for EQW, the matching size for IND and s for OPT.
    For OPT, ``cover`` holds the optimal dual: a fractional vertex cover
    keyed by vertex, certifying optimality.
    """
    method: WeightingMethod
    weights: Tuple[float, ...]
    normalizer: float
    cover: Optional[Dict[Vertex, float]] = None

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(sum(self.weights))

    def support(self) -> Tuple[int, ...]:
        """Indices of edges with positive weight."""
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a feasibility check; truthy iff feasible."""
    feasible: bool
    violated_vertex: Optional[Vertex] = None
    load: Optional[float] = None
    negative_index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.feasible

    def describe(self) -> str:
        if self.feasible:
            return "feasible"
        if self.negative_index is not None:
            return f"negative weight at edge {self.negative_index}"
        return f"vertex {self.violated_vertex} carries total weight {self.load:.12g} > 1"


def _require_edges(graph: KPartiteHypergraph) -> None:
    if graph.m == 0:
        raise WeightingError("weighting requires at least one hyperedge")


def eqw_weights(graph: KPartiteHypergraph) -> Weighting:
    """Equal weights: every example counts once, normalizer m.

    Raises:
        WeightingError: If the edge set is empty
    """
    _require_edges(graph)
    return Weighting(WeightingMethod.EQW, (1.0,) * graph.m, float(graph.m))


def greedy_matching_weights(graph: KPartiteHypergraph, order: Optional[Sequence[int]] = None) -> Weighting:
    """0/1 weights of the maximal matching found by scanning edges in order.

    Args:
        graph: Hypergraph
        order: Permutation of edge indices (identity by default)

    Returns:
        IND weighting whose normalizer is the matching size
    """
    _require_edges(graph)
    order = list(range(graph.m)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(graph.m)):
        raise WeightingError("order must be a permutation of the edge indices")

    used = set()
    weights = [0.0] * graph.m
    for index in order:
        vertices = [(i, c) for i, c in enumerate(graph.edges[index])]
        if any(v in used for v in vertices):
            continue
        used.update(vertices)
        weights[index] = 1.0
    size = sum(weights)
    logger.info(f"greedy matching: {int(size)} of {graph.m} edges")
    return Weighting(WeightingMethod.IND, tuple(weights), float(size))


def exact_matching_weights(graph: KPartiteHypergraph, cap: Optional[int] = None) -> Weighting:
    """0/1 weights of a maximum matching (a maximum independent set of Gamma).

    Raises:
        InstanceTooLargeError: If m exceeds the exact cap
    """
    _require_edges(graph)
    chosen = maximum_independent_set(build_dependency_graph(graph), cap)
    weights = [0.0] * graph.m
    for index in chosen:
        weights[index] = 1.0
    return Weighting(WeightingMethod.IND, tuple(weights), float(len(chosen)))


def optimal_weighting(graph: KPartiteHypergraph) -> Weighting:
    """Solve the s-value LP: max sum(w) s.t. w >= 0 and w(eta(v)) <= 1 for every vertex.

    Rows are the vertices of degree >= 1; degree-0 vertices give vacuous rows
    and are left out. The dual solution is a fractional vertex cover whose
    total equals s.

    Returns:
        OPT weighting with normalizer s = sum(w)
    """
    _require_edges(graph)
    incidence = graph.incidence()
    vertices = list(incidence)
    matrix = np.zeros((len(vertices), graph.m))
    for row, vertex in enumerate(vertices):
        for index in incidence[vertex]:
            matrix[row, index] += 1.0
    solution = solve_packing_lp(matrix)
    weights = tuple(float(min(w, 1.0)) for w in solution.x)
    cover = {v: float(y) for v, y in zip(vertices, solution.y)}
    s = float(sum(weights))
    logger.info(f"optimal weighting: s={s:.12g} over {graph.m} edges and {len(vertices)} vertices")
    return Weighting(WeightingMethod.OPT, weights, s, cover)


def s_value(graph: KPartiteHypergraph) -> float:
    """The s-value s(G): total weight of an optimal feasible weighting."""
    return optimal_weighting(graph).normalizer


def lp_certificate_gap(graph: KPartiteHypergraph, weighting: Weighting) -> float:
    """Strong-duality gap |sum(y) - s| of an OPT weighting, after checking dual feasibility.

    Raises:
        WeightingError: If the weighting carries no cover or the cover
            misses an edge by more than the tolerance
    """
    if weighting.cover is None:
        raise WeightingError("weighting carries no dual certificate")
    for index, edge in enumerate(graph.edges):
        covered = sum(weighting.cover.get((i, c), 0.0) for i, c in enumerate(edge))
        if covered < 1.0 - FEASIBILITY_TOL:
            raise WeightingError(f"dual cover leaves edge {index} at {covered:.12g} < 1")
    return abs(sum(weighting.cover.values()) - weighting.normalizer)


def verify_feasible(graph: KPartiteHypergraph, weights: Sequence[float]) -> FeasibilityReport:
    """Check w >= 0 and w(eta(v)) <= 1 (within 1e-9) at every vertex.

    Args:
        graph: Hypergraph
        weights: One weight per edge

    Returns:
        FeasibilityReport naming the first negative index or the first
        overloaded vertex in (partition, index) order

    Raises:
        WeightingError: On a length mismatch
    """
    if len(weights) != graph.m:
        raise WeightingError(f"expected {graph.m} weights, got {len(weights)}")
    for index, w in enumerate(weights):
        if w < -FEASIBILITY_TOL:
            return FeasibilityReport(False, negative_index=index)
    for vertex, members in graph.incidence().items():
        load = float(sum(weights[i] for i in members))
        if load > 1.0 + FEASIBILITY_TOL:
            return FeasibilityReport(False, violated_vertex=vertex, load=load)
    return FeasibilityReport(True)


def weighting_for(graph: KPartiteHypergraph, method: str, order: Optional[Sequence[int]] = None) -> Weighting:
    """Dispatch on a method name: eqw, ind (greedy), ind-exact or opt."""
    if method == "eqw":
        return eqw_weights(graph)
    if method == "ind":
        return greedy_matching_weights(graph, order)
    if method == "ind-exact":
        return exact_matching_weights(graph)
    if method == "opt":
        return optimal_weighting(graph)
    raise WeightingError(f"unknown weighting method '{method}'")
