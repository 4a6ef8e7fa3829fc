"""Frequency-based edge sampling baseline.

Builds one node per event type observed in the training edges, then adds
edges by sampling type pairs proportionally to their training frequency.
Duplicate draws are skipped; the first draw that would close a cycle (a
self-pair counts) stops the process, and a draw cap bounds the worst case.
"""

from __future__ import annotations

import heapq
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DataError
from .schema import Schema


@dataclass
class EdgeFrequencyTable:
    """Counts of directed type pairs (source type, target type)."""

    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        self.counts = {
            (int(u), int(v)): int(c) for (u, v), c in self.counts.items()
        }
        for (u, v), c in self.counts.items():
            if c < 1:
                raise DataError(f"pair ({u}, {v}) has non-positive count {c}")
            if u < 0 or v < 0:
                raise DataError(f"pair ({u}, {v}) has negative type index")

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def count_frequencies(graphs) -> EdgeFrequencyTable:
    """Tally the type pair of every edge across the given graphs."""
    graphs = list(graphs)
    if not graphs:
        raise DataError("expected at least one graph to count over")
    counts: Counter = Counter()
    for graph in graphs:
        for i, j in graph.edges:
            counts[(graph.node_types[i], graph.node_types[j])] += 1
    return EdgeFrequencyTable(dict(counts))


def _reaches(adj: dict[int, set[int]], start: int, goal: int) -> bool:
    stack = [start]
    seen = set()
    while stack:
        v = stack.pop()
        if v == goal:
            return True
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v])
    return False


def fbs_schema(
    table: EdgeFrequencyTable,
    seed: int,
    *,
    max_draw_factor: int = 10,
    prune_isolated: bool = False,
) -> Schema:
    """Sample one schema from an edge-frequency table.

    Nodes are the types appearing in the table, one each. Pairs are drawn
    with probability proportional to count; a duplicate is skipped, and the
    first draw that would create a cycle ends sampling. At most
    ``max_draw_factor * len(table)`` draws are made.
    """
    if not table.counts:
        raise DataError("edge frequency table is empty")
    if max_draw_factor < 1:
        raise ConfigError("max_draw_factor must be >= 1")

    pairs = sorted(table.counts)
    weights = np.array([table.counts[p] for p in pairs], dtype=np.float64)
    probs = weights / weights.sum()
    rng = np.random.default_rng(seed)

    node_types = sorted({t for pair in pairs for t in pair})
    index = {t: i for i, t in enumerate(node_types)}
    adj: dict[int, set[int]] = defaultdict(set)
    edges: set[tuple[int, int]] = set()

    for _ in range(max_draw_factor * len(pairs)):
        u_type, v_type = pairs[int(rng.choice(len(pairs), p=probs))]
        u, v = index[u_type], index[v_type]
        if u == v:
            break
        if (u, v) in edges:
            continue
        if _reaches(adj, v, u):
            break
        edges.add((u, v))
        adj[u].add(v)

    if prune_isolated:
        used = {t for u, v in edges for t in (u, v)}
        keep = [i for i in range(len(node_types)) if i in used]
    else:
        keep = list(range(len(node_types)))

    # Renumber along a topological order of the sampled DAG so every edge
    # points forward, matching the schema contract.
    order = _stable_topological_order(keep, edges)
    rank = {v: r for r, v in enumerate(order)}
    return Schema(
        [node_types[v] for v in order],
        {(rank[u], rank[v]) for u, v in edges if u in rank and v in rank},
    )


def _stable_topological_order(nodes: list[int], edges: set[tuple[int, int]]) -> list[int]:
    node_set = set(nodes)
    indegree = {v: 0 for v in nodes}
    succ = defaultdict(list)
    for u, v in edges:
        if u in node_set and v in node_set:
            indegree[v] += 1
            succ[u].append(v)
    ready = [v for v in nodes if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in sorted(succ[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(ready, w)
    return order
