"""k-partite hypergraphs, their dependency graphs and exact graph invariants."""

import json
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..utils.config import get_config
from .simplex import solve_packing_lp

logger = logging.getLogger(__name__)

Vertex = Tuple[int, int]  # (partition, index)
Edge = Tuple[int, ...]


class HypergraphError(Exception):
    """Base exception for hypergraph operations."""
    pass


class HypergraphParseError(HypergraphError):
    """Raised when a hypergraph file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InstanceTooLargeError(HypergraphError):
    """Raised when an exact computation exceeds its configured size cap."""

    def __init__(self, message: str, size: int, cap: int):
        super().__init__(message)
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class KPartiteHypergraph:
    """The network G: k vertex partitions and an ordered list of hyperedges.

    Component i of every edge indexes into partition i (0-based). Duplicate
    edges are allowed and denote distinct examples.
    """
    k: int
    partition_sizes: Tuple[int, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "partition_sizes", tuple(int(n) for n in self.partition_sizes))
        object.__setattr__(self, "edges", tuple(tuple(int(c) for c in e) for e in self.edges))
        if self.k < 1:
            raise HypergraphError(f"k must be positive, got {self.k}")
        if len(self.partition_sizes) != self.k:
            raise HypergraphError(
                f"expected {self.k} partition sizes, got {len(self.partition_sizes)}"
            )
        if any(n < 1 for n in self.partition_sizes):
            raise HypergraphError(f"partition sizes must be positive: {list(self.partition_sizes)}")
        for index, edge in enumerate(self.edges):
            if len(edge) != self.k:
                raise HypergraphError(f"edge {index} has {len(edge)} components, expected {self.k}")
            for i, component in enumerate(edge):
                if not 0 <= component < self.partition_sizes[i]:
                    raise HypergraphError(
                        f"edge {index} component {i} = {component} outside [0, {self.partition_sizes[i]})"
                    )

    @property
    def m(self) -> int:
        """Number of hyperedges."""
        return len(self.edges)

    def incidence(self) -> Dict[Vertex, Tuple[int, ...]]:
        """Map every vertex of degree >= 1 to the edges containing it (eta(v)).

        Returns:
            Dictionary ordered by (partition, index)
        """
        table: Dict[Vertex, List[int]] = defaultdict(list)
        for index, edge in enumerate(self.edges):
            for i, component in enumerate(edge):
                table[(i, component)].append(index)
        return {v: tuple(table[v]) for v in sorted(table)}

    def degrees(self, partition: int) -> List[int]:
        """Degree of every vertex in one partition, including isolated ones."""
        counts = [0] * self.partition_sizes[partition]
        for edge in self.edges:
            counts[edge[partition]] += 1
        return counts

    def active_counts(self) -> Tuple[int, ...]:
        """Number of vertices of degree >= 1 in each partition (n_i')."""
        return tuple(len({edge[i] for edge in self.edges}) for i in range(self.k))

    def max_degree(self) -> int:
        """Largest vertex degree over all partitions (0 for an empty edge list)."""
        return max((max(self.degrees(i)) for i in range(self.k)), default=0)

    def duplicate_edges(self) -> List[Tuple[int, int]]:
        """Pairs (first, duplicate) of edge indices with identical components."""
        first_seen: Dict[Edge, int] = {}
        duplicates = []
        for index, edge in enumerate(self.edges):
            if edge in first_seen:
                duplicates.append((first_seen[edge], index))
            else:
                first_seen[edge] = index
        return duplicates

    def permuted(self, order: Sequence[int]) -> "KPartiteHypergraph":
        """Return the hypergraph whose edge j is this graph's edge order[j]."""
        if sorted(order) != list(range(self.m)):
            raise HypergraphError("order must be a permutation of the edge indices")
        return KPartiteHypergraph(self.k, self.partition_sizes, tuple(self.edges[j] for j in order))

    def to_text(self) -> str:
        """Serialize in the line-oriented hypergraph file format."""
        lines = [f"{self.k} {self.m}", " ".join(str(n) for n in self.partition_sizes)]
        lines.extend(" ".join(str(c) for c in edge) for edge in self.edges)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        """Serialize in the JSON hypergraph format."""
        return json.dumps({
            "k": self.k,
            "partition_sizes": list(self.partition_sizes),
            "edges": [list(edge) for edge in self.edges],
        })


@dataclass(frozen=True)
class DependencyGraph:
    """Overlap graph over hyperedges: one vertex per edge, adjacent iff they share a vertex."""
    m: int
    neighbors: Tuple[FrozenSet[int], ...]

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.neighbors[a]

    def edge_pairs(self) -> List[Tuple[int, int]]:
        """Adjacent pairs (a, b) with a < b, sorted."""
        return [(a, b) for a in range(self.m) for b in sorted(self.neighbors[a]) if a < b]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.m))
        graph.add_edges_from(self.edge_pairs())
        return graph

    @classmethod
    def from_pairs(cls, m: int, pairs: Sequence[Tuple[int, int]]) -> "DependencyGraph":
        """Build a graph directly from adjacent pairs (self-loops rejected)."""
        table: List[set] = [set() for _ in range(m)]
        for a, b in pairs:
            if a == b:
                raise HypergraphError(f"self-loop on vertex {a}")
            table[a].add(b)
            table[b].add(a)
        return cls(m, tuple(frozenset(s) for s in table))


def _parse_json(text: str) -> KPartiteHypergraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise HypergraphParseError(f"invalid JSON: {e.msg}", e.lineno) from e
    for key in ("k", "partition_sizes", "edges"):
        if key not in data:
            raise HypergraphParseError(f"missing key '{key}'")
    try:
        return KPartiteHypergraph(int(data["k"]), tuple(data["partition_sizes"]), tuple(data["edges"]))
    except (TypeError, ValueError) as e:
        raise HypergraphParseError(f"malformed value: {e}") from e
    except HypergraphError as e:
        raise HypergraphParseError(str(e)) from e


def _parse_ints(fields: List[str], line: int) -> List[int]:
    try:
        return [int(field) for field in fields]
    except ValueError:
        raise HypergraphParseError(f"expected integers, got {' '.join(fields)!r}", line)


def parse_hypergraph(text: str) -> KPartiteHypergraph:
    """Parse hypergraph file content.

    The line format is ``k m``, then ``n_1 .. n_k``, then m lines of k 0-based
    vertex indices; ``#`` starts a comment line. Content whose first
    non-blank character is ``{`` is read as JSON with keys ``k``,
    ``partition_sizes`` and ``edges``.

    Args:
        text: Hypergraph file content

    Returns:
        Validated hypergraph

    Raises:
        HypergraphParseError: On malformed syntax, k mismatch or an
            out-of-range index (with the offending line number)
    """
    if text.lstrip().startswith("{"):
        return _parse_json(text)

    rows = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((number, stripped.split()))

    if not rows:
        raise HypergraphParseError("empty hypergraph file")
    line, header = rows[0]
    if len(header) != 2:
        raise HypergraphParseError("header must be 'k m'", line)
    k, m = _parse_ints(header, line)
    if k < 1 or m < 0:
        raise HypergraphParseError(f"invalid header k={k} m={m}", line)
    if len(rows) < 2:
        raise HypergraphParseError("missing partition sizes line")
    line, size_fields = rows[1]
    sizes = _parse_ints(size_fields, line)
    if len(sizes) != k:
        raise HypergraphParseError(f"expected {k} partition sizes, got {len(sizes)}", line)
    if any(n < 1 for n in sizes):
        raise HypergraphParseError("partition sizes must be positive", line)

    edge_rows = rows[2:]
    if len(edge_rows) != m:
        where = edge_rows[m][0] if len(edge_rows) > m else None
        raise HypergraphParseError(f"header declares {m} edges, found {len(edge_rows)}", where)

    edges = []
    for line, fields in edge_rows:
        edge = _parse_ints(fields, line)
        if len(edge) != k:
            raise HypergraphParseError(f"edge has {len(edge)} components, expected {k}", line)
        for i, component in enumerate(edge):
            if not 0 <= component < sizes[i]:
                raise HypergraphParseError(
                    f"index {component} out of range for partition {i} of size {sizes[i]}", line
                )
        edges.append(tuple(edge))

    graph = KPartiteHypergraph(k, tuple(sizes), tuple(edges))
    duplicates = graph.duplicate_edges()
    if duplicates:
        logger.warning(f"{len(duplicates)} duplicate hyperedge(s); treated as distinct examples")
    return graph


def build_dependency_graph(graph: KPartiteHypergraph) -> DependencyGraph:
    """Build the dependency graph of a hypergraph.

    Two edges are adjacent iff they share a vertex in some partition;
    duplicate edges are therefore adjacent to each other.

    Args:
        graph: Hypergraph

    Returns:
        Symmetric, irreflexive dependency graph on m vertices
    """
    table: List[set] = [set() for _ in range(graph.m)]
    for members in graph.incidence().values():
        for a in members:
            for b in members:
                if a != b:
                    table[a].add(b)
    return DependencyGraph(graph.m, tuple(frozenset(s) for s in table))


def _check_cap(size: int, cap: int, what: str, hint: str) -> None:
    if size > cap:
        raise InstanceTooLargeError(
            f"{what} is computed exactly only for m <= {cap} (got m={size}); {hint}",
            size=size,
            cap=cap,
        )


def maximum_independent_set(gamma: DependencyGraph, cap: Optional[int] = None) -> Tuple[int, ...]:
    """Find a maximum independent set by branch and bound.

    Args:
        gamma: Dependency graph
        cap: Largest m handled (defaults to the configured alpha_cap)

    Returns:
        Sorted vertex indices of one maximum independent set

    Raises:
        InstanceTooLargeError: If m exceeds the cap
        HypergraphError: If the graph is empty
    """
    cap = get_config().get("alpha_cap") if cap is None else cap
    _check_cap(gamma.m, cap, "independence number", "use greedy matching weights instead")
    if gamma.m == 0:
        raise HypergraphError("independence number needs at least one vertex")

    masks = [sum(1 << b for b in gamma.neighbors[a]) for a in range(gamma.m)]
    best = [0]

    def popcount(x: int) -> int:
        return bin(x).count("1")

    def search(candidates: int, chosen: int) -> None:
        if popcount(chosen) + popcount(candidates) <= popcount(best[0]):
            return
        # Vertices with no neighbour among the candidates are always taken.
        free = 0
        pivot, pivot_degree = -1, -1
        rest = candidates
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            degree = popcount(masks[v] & candidates)
            if degree == 0:
                free |= low
            elif degree > pivot_degree:
                pivot, pivot_degree = v, degree
        chosen |= free
        candidates &= ~free
        if not candidates:
            if popcount(chosen) > popcount(best[0]):
                best[0] = chosen
            return
        bit = 1 << pivot
        search(candidates & ~bit & ~masks[pivot], chosen | bit)
        search(candidates & ~bit, chosen)

    search((1 << gamma.m) - 1, 0)
    return tuple(v for v in range(gamma.m) if best[0] >> v & 1)


def independence_number(gamma: DependencyGraph, cap: Optional[int] = None) -> int:
    """Compute alpha(Gamma) exactly.

    Args:
        gamma: Dependency graph
        cap: Largest m handled (defaults to the configured alpha_cap)

    Returns:
        Size of a largest independent set
    """
    return len(maximum_independent_set(gamma, cap))


def maximal_independent_sets(gamma: DependencyGraph) -> List[Tuple[int, ...]]:
    """All maximal independent sets, as sorted tuples in lexicographic order.

    They are the maximal cliques of the complement graph (Bron-Kerbosch).
    """
    complement = nx.complement(gamma.to_networkx())
    return sorted(tuple(sorted(clique)) for clique in nx.find_cliques(complement))


def fractional_chromatic_number(gamma: DependencyGraph, cap: Optional[int] = None) -> float:
    """Compute chi*(Gamma) exactly via its linear program.

    chi* minimizes the total weight on independent sets such that every
    vertex is covered with weight at least 1. The solver works on the dual
    packing problem (maximum fractional clique), whose optimum is equal.

    Args:
        gamma: Dependency graph
        cap: Largest m handled (defaults to the configured chi_cap)

    Returns:
        Fractional chromatic number (>= 1)

    Raises:
        InstanceTooLargeError: If m exceeds the cap
        HypergraphError: If the graph is empty
    """
    cap = get_config().get("chi_cap") if cap is None else cap
    _check_cap(gamma.m, cap, "fractional chromatic number", "the EQW chromatic bound is unavailable")
    if gamma.m == 0:
        raise HypergraphError("fractional chromatic number needs at least one vertex")

    sets = maximal_independent_sets(gamma)
    matrix = np.zeros((len(sets), gamma.m))
    for row, members in enumerate(sets):
        matrix[row, list(members)] = 1.0
    solution = solve_packing_lp(matrix)
    logger.info(f"chi*: {len(sets)} maximal independent sets, value {solution.objective:.12g}")
    return solution.objective


def dependency_summary(gamma: DependencyGraph) -> Dict[str, Optional[float]]:
    """alpha and chi* when within caps, None otherwise."""
    summary: Dict[str, Optional[float]] = {"alpha": None, "chi_star": None}
    try:
        summary["alpha"] = independence_number(gamma)
    except InstanceTooLargeError as e:
        logger.warning(str(e))
    try:
        summary["chi_star"] = fractional_chromatic_number(gamma)
    except InstanceTooLargeError as e:
        logger.warning(str(e))
    return summary
