"""Set-based F1 metrics between a generated schema and held-out graphs.

Two families: event-type match (distinct type sets) and event-sequence
match (tuples of types along directed paths of a fixed node count). Both
compare unordered sets, so repeated occurrences collapse.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError, DataError

# Published reference scores (event-type F1, 2-node and 3-node sequence F1)
# for the three bombing scenarios; used by the evaluation CLI to print a
# side-by-side comparison.
PUBLISHED_BASELINES = {
    "suicide-ied": {
        "temporal-event-graph-model": (0.609, 0.174, 0.048),
        "frequency-based-sampling": (0.642, 0.164, 0.036),
        "double-gae": (0.709, 0.290, 0.095),
        "diffusion": (0.775, 0.534, 0.330),
    },
    "general-ied": {
        "temporal-event-graph-model": (0.638, 0.181, 0.065),
        "frequency-based-sampling": (0.617, 0.149, 0.064),
        "double-gae": (0.697, 0.273, 0.128),
    },
    "car-ied": {
        "temporal-event-graph-model": (0.588, 0.162, 0.044),
        "frequency-based-sampling": (0.542, 0.126, 0.038),
        "double-gae": (0.674, 0.259, 0.081),
    },
}


def _set_f1(predicted: set, reference: set) -> float:
    if not predicted and not reference:
        return 1.0
    if not predicted or not reference:
        return 0.0
    hits = len(predicted & reference)
    if hits == 0:
        return 0.0
    precision = hits / len(predicted)
    recall = hits / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def _successors(obj) -> dict[int, list[int]]:
    succ = defaultdict(list)
    for i, j in obj.edges:
        succ[i].append(j)
    return succ


def _reachable_pairs(obj) -> set[tuple[int, int]]:
    succ = _successors(obj)
    pairs = set()
    for start in range(len(obj.node_types)):
        stack = list(succ[start])
        seen = set()
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(succ[v])
        pairs.update((start, v) for v in seen)
    return pairs


def _path_type_tuples(obj, length: int, transitive: bool) -> set[tuple]:
    """Type tuples along directed paths visiting ``length`` nodes."""
    types = obj.node_types
    links = _reachable_pairs(obj) if transitive else set(obj.edges)
    if length == 2:
        return {(types[i], types[j]) for i, j in links}
    succ = defaultdict(list)
    for i, j in links:
        succ[i].append(j)
    return {
        (types[i], types[j], types[k])
        for i, j in links
        for k in succ[j]
    }


def event_type_f1(schema, graph) -> float:
    """F1 between the distinct event-type sets of a schema and a graph."""
    return _set_f1(schema.type_set(), graph.type_set())


def event_seq_f1(schema, graph, length: int, transitive: bool = False) -> float:
    """F1 between type tuples along directed paths of ``length`` nodes.

    The default reads paths off adjacent edges; ``transitive=True`` chains
    reachability instead, for sensitivity checks.
    """
    if length not in (2, 3):
        raise ConfigError(f"path length must be 2 or 3, got {length}")
    return _set_f1(
        _path_type_tuples(schema, length, transitive),
        _path_type_tuples(graph, length, transitive),
    )


@dataclass
class MetricsReport:
    """Aggregate and per-graph scores for one schema against a graph set."""

    event_type_f1: float
    seq_f1_l2: float
    seq_f1_l3: float
    per_graph: list[tuple[str, float, float, float]] = field(default_factory=list)

    def __post_init__(self):
        for value in (self.event_type_f1, self.seq_f1_l2, self.seq_f1_l3):
            if not 0.0 <= value <= 1.0:
                raise DataError(f"score {value} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "event_type_f1": self.event_type_f1,
            "seq_f1_l2": self.seq_f1_l2,
            "seq_f1_l3": self.seq_f1_l3,
            "per_graph": [
                {"graph_id": gid, "event_type_f1": a, "seq_f1_l2": b, "seq_f1_l3": c}
                for gid, a, b, c in self.per_graph
            ],
        }


def evaluate(schema, graphs, transitive: bool = False) -> MetricsReport:
    """Score one schema against every graph; aggregates are arithmetic means."""
    graphs = list(graphs)
    if not graphs:
        raise DataError("expected at least one graph to evaluate against")
    rows = []
    for graph in graphs:
        rows.append(
            (
                graph.graph_id,
                event_type_f1(schema, graph),
                event_seq_f1(schema, graph, 2, transitive),
                event_seq_f1(schema, graph, 3, transitive),
            )
        )
    n = len(rows)
    return MetricsReport(
        event_type_f1=sum(r[1] for r in rows) / n,
        seq_f1_l2=sum(r[2] for r in rows) / n,
        seq_f1_l3=sum(r[3] for r in rows) / n,
        per_graph=rows,
    )


def write_metrics_json(report: MetricsReport, path):
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def write_metrics_csv(report: MetricsReport, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph_id", "event_type_f1", "seq_f1_l2", "seq_f1_l3"])
        for gid, a, b, c in report.per_graph:
            writer.writerow([gid, f"{a:.6f}", f"{b:.6f}", f"{c:.6f}"])
        writer.writerow(
            [
                "mean",
                f"{report.event_type_f1:.6f}",
                f"{report.seq_f1_l2:.6f}",
                f"{report.seq_f1_l3:.6f}",
            ]
        )


def write_comparison_csv(report: MetricsReport, dataset_name: str, method: str, path):
    """This run next to published scores for the same dataset, if known."""
    rows = [(method, report.event_type_f1, report.seq_f1_l2, report.seq_f1_l3)]
    for baseline, scores in PUBLISHED_BASELINES.get(dataset_name.lower(), {}).items():
        rows.append((f"published/{baseline}", *scores))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "event_type_f1", "seq_f1_l2", "seq_f1_l3"])
        for name, a, b, c in rows:
            writer.writerow([name, f"{a:.6f}", f"{b:.6f}", f"{c:.6f}"])
