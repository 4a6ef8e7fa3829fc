"""Instance graphs, topological sorting, and sort-based augmentation.

An instance graph is a DAG of typed atomic events whose edges encode
temporal precedence. Training consumes fixed-length sorted views: node
types laid out in a topological order, padded with PAD up to a common
length, plus the adjacency matrix rewritten in sorted positions (which
makes it strictly upper triangular).
"""

from __future__ import annotations

import heapq
import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DataError
from .utils import derive_seed

SPLITS = ("train", "val", "test")


def _is_acyclic(n_nodes, edges) -> bool:
    indegree = [0] * n_nodes
    successors = defaultdict(list)
    for i, j in edges:
        indegree[j] += 1
        successors[i].append(j)
    ready = [v for v in range(n_nodes) if indegree[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for w in successors[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(w)
    return seen == n_nodes


@dataclass
class InstanceGraph:
    """A DAG of typed events; edge (i, j) means event i precedes event j."""

    node_types: list[int]
    edges: set[tuple[int, int]] = field(default_factory=set)
    graph_id: str = ""
    split: str = "train"

    def __post_init__(self):
        self.node_types = [int(t) for t in self.node_types]
        self.edges = {(int(i), int(j)) for i, j in self.edges}
        label = f"graph {self.graph_id!r}" if self.graph_id else "graph"
        if self.split not in SPLITS:
            raise DataError(f"{label}: unknown split {self.split!r}")
        if any(t < 0 for t in self.node_types):
            raise DataError(f"{label}: negative event type index")
        n = len(self.node_types)
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"{label}: edge ({i}, {j}) out of range")
            if i == j:
                raise DataError(f"{label}: self-loop at node {i}")
        if not _is_acyclic(n, self.edges):
            raise DataError(f"{label}: precedence relation contains a cycle")

    @property
    def num_nodes(self) -> int:
        return len(self.node_types)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def type_set(self) -> set[int]:
        return set(self.node_types)


@dataclass
class SortedGraph:
    """Fixed-length sorted view of an instance graph.

    ``sequence`` holds ``real_count`` event types in a topological order
    followed by PAD indices up to the common length m. ``adjacency`` is the
    m-by-m 0/1 matrix in sorted positions; sorting guarantees it is strictly
    upper triangular, and PAD rows and columns are all zero. ``node_order``
    maps each real position back to the node index in the source graph.
    """

    sequence: list[int]
    adjacency: np.ndarray
    real_count: int
    node_order: tuple[int, ...] | None = None

    def __post_init__(self):
        self.sequence = [int(t) for t in self.sequence]
        self.adjacency = np.asarray(self.adjacency, dtype=np.uint8)
        m = len(self.sequence)
        if self.adjacency.shape != (m, m):
            raise DataError(
                f"adjacency shape {self.adjacency.shape} does not match length {m}"
            )
        if not 0 <= self.real_count <= m:
            raise DataError(f"real_count {self.real_count} out of range for length {m}")
        if np.any(self.adjacency != np.triu(self.adjacency, k=1)):
            raise DataError("adjacency must be strictly upper triangular")
        if self.adjacency[self.real_count :, :].any() or self.adjacency[:, self.real_count :].any():
            raise DataError("padded positions must have no edges")

    @property
    def length(self) -> int:
        return len(self.sequence)

    def edge_pairs(self) -> set[tuple[int, int]]:
        rows, cols = np.nonzero(self.adjacency)
        return {(int(i), int(j)) for i, j in zip(rows, cols)}


def _topological_order(graph: InstanceGraph, seed=None) -> list[int]:
    n = graph.num_nodes
    indegree = [0] * n
    successors = defaultdict(list)
    for i, j in graph.edges:
        indegree[j] += 1
        successors[i].append(j)

    order: list[int] = []
    if seed is None:
        ready = [v for v in range(n) if indegree[v] == 0]
        heapq.heapify(ready)
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for w in sorted(successors[v]):
                indegree[w] -= 1
                if indegree[w] == 0:
                    heapq.heappush(ready, w)
    else:
        rng = np.random.default_rng(seed)
        ready = sorted(v for v in range(n) if indegree[v] == 0)
        while ready:
            v = ready.pop(int(rng.integers(len(ready))))
            order.append(v)
            for w in sorted(successors[v]):
                indegree[w] -= 1
                if indegree[w] == 0:
                    ready.append(w)
    if len(order) != n:
        raise DataError(f"graph {graph.graph_id!r}: precedence relation contains a cycle")
    return order


def topological_sort(graph: InstanceGraph, m: int, seed=None, *, pad_index: int) -> SortedGraph:
    """Sort a graph topologically and pad it to length m.

    With ``seed=None`` the order is deterministic (smallest original node
    index among the ready set first). With a seed, ties are broken uniformly
    at random, which samples one of the graph's valid topological orders.
    """
    n = graph.num_nodes
    if n > m:
        raise DataError(
            f"graph {graph.graph_id!r} has {n} nodes, more than the limit {m}"
        )
    order = _topological_order(graph, seed)
    position = {v: p for p, v in enumerate(order)}
    sequence = [graph.node_types[v] for v in order] + [pad_index] * (m - n)
    adjacency = np.zeros((m, m), dtype=np.uint8)
    for i, j in graph.edges:
        adjacency[position[i], position[j]] = 1
    return SortedGraph(sequence, adjacency, real_count=n, node_order=tuple(order))


def to_instance_graph(sorted_graph: SortedGraph, graph_id: str = "", split: str = "train") -> InstanceGraph:
    """Strip padding and rebuild an instance graph in sorted-position indexing."""
    k = sorted_graph.real_count
    edges = {(i, j) for i, j in sorted_graph.edge_pairs() if i < k and j < k}
    return InstanceGraph(sorted_graph.sequence[:k], edges, graph_id=graph_id, split=split)


def truncate_to_limit(graph: InstanceGraph, m: int, *, on_oversize: str = "truncate") -> InstanceGraph:
    """Clamp a graph to at most m nodes.

    Keeps the first m nodes of the deterministic topological order and drops
    edges into the removed tail, so the kept prefix stays a valid DAG. With
    ``on_oversize="error"`` an oversize graph raises instead.
    """
    if on_oversize not in ("truncate", "error"):
        raise ConfigError(f"unknown oversize policy {on_oversize!r}")
    if graph.num_nodes <= m:
        return graph
    if on_oversize == "error":
        raise DataError(
            f"graph {graph.graph_id!r} has {graph.num_nodes} nodes, more than the limit {m}"
        )
    warnings.warn(
        f"graph {graph.graph_id!r}: truncating {graph.num_nodes} nodes to {m}",
        stacklevel=2,
    )
    kept = _topological_order(graph)[:m]
    rank = {v: r for r, v in enumerate(kept)}
    edges = {
        (rank[i], rank[j]) for i, j in graph.edges if i in rank and j in rank
    }
    return InstanceGraph(
        [graph.node_types[v] for v in kept], edges, graph_id=graph.graph_id, split=graph.split
    )


def augment_by_resorting(
    graphs: list[InstanceGraph], n: int, seed: int, *, m: int, pad_index: int
) -> list[SortedGraph]:
    """Produce n sorted variants per graph, grouped per input graph.

    Variant 0 uses the deterministic order; the rest draw random topological
    orders. Graphs whose order is unique (chains) simply repeat.
    """
    if n < 1:
        raise ConfigError(f"number of sorted variants must be >= 1, got {n}")
    out: list[SortedGraph] = []
    for g_idx, graph in enumerate(graphs):
        out.append(topological_sort(graph, m, pad_index=pad_index))
        for variant in range(1, n):
            child = derive_seed(seed, g_idx, variant)
            out.append(topological_sort(graph, m, seed=child, pad_index=pad_index))
    return out
