"""Dataset serialization, adapters, statistics, and synthetic corpora.

The canonical on-disk form is a single JSON document:

    {
      "ontology": ["TypeA", "TypeB", ...],          # real types, no PAD
      "graphs": [
        {"id": "g000", "split": "train",
         "nodes": ["TypeB", "TypeA", ...],           # one type name per node
         "edges": [[0, 1], [1, 2], ...]},            # i precedes j
        ...
      ]
    }

Foreign formats plug in through named adapter callables that rewrite a raw
parsed document into this shape before validation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .exceptions import ConfigError, DataError
from .graphs import SPLITS, InstanceGraph
from .ontology import EventOntology

DATASET_FORMAT = "skeldiff-dataset"

_ADAPTERS: dict[str, Callable[[dict], dict]] = {}


def register_adapter(name: str):
    """Register a converter from a foreign parsed document to canonical form."""

    def wrap(fn):
        _ADAPTERS[name] = fn
        return fn

    return wrap


def dataset_to_dict(ontology: EventOntology, graphs: list[InstanceGraph]) -> dict:
    records = []
    for graph in graphs:
        records.append(
            {
                "id": graph.graph_id,
                "split": graph.split,
                "nodes": [ontology.name_of(t) for t in graph.node_types],
                "edges": sorted([i, j] for i, j in graph.edges),
            }
        )
    return {
        "format": DATASET_FORMAT,
        "ontology": list(ontology.event_types),
        "graphs": records,
    }


def dataset_from_dict(payload: dict, ontology: EventOntology | None = None):
    if not isinstance(payload, dict) or "graphs" not in payload or "ontology" not in payload:
        raise DataError("dataset document must carry 'ontology' and 'graphs'")
    file_ontology = EventOntology.from_event_types(payload["ontology"])
    if ontology is None:
        ontology = file_ontology
    elif ontology != file_ontology:
        raise DataError("dataset ontology does not match the expected ontology")
    records = payload["graphs"]
    if not records:
        raise DataError("dataset contains no graphs")
    graphs = []
    for k, rec in enumerate(records):
        graph_id = str(rec.get("id", f"graph-{k}"))
        try:
            types = [ontology.index_of(name) for name in rec["nodes"]]
            edges = {(int(i), int(j)) for i, j in rec.get("edges", [])}
            graphs.append(
                InstanceGraph(types, edges, graph_id=graph_id, split=rec.get("split", "train"))
            )
        except DataError as exc:
            raise DataError(f"graph {graph_id!r}: {exc}") from None
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"graph {graph_id!r}: malformed record ({exc})") from None
    return ontology, graphs


def load_dataset(path, ontology: EventOntology | None = None, adapter: str | None = None):
    """Read and validate a dataset file.

    Returns ``(ontology, graphs)``. When an ontology is supplied it must
    match the one stored in the file, name for name.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if adapter is not None:
        if adapter not in _ADAPTERS:
            raise ConfigError(
                f"unknown adapter {adapter!r}; registered: {sorted(_ADAPTERS) or 'none'}"
            )
        payload = _ADAPTERS[adapter](payload)
    return dataset_from_dict(payload, ontology)


def save_dataset(path, ontology: EventOntology, graphs: list[InstanceGraph]):
    payload = dataset_to_dict(ontology, graphs)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def split_graphs(graphs: list[InstanceGraph]) -> dict[str, list[InstanceGraph]]:
    parts: dict[str, list[InstanceGraph]] = {split: [] for split in SPLITS}
    for graph in graphs:
        parts[graph.split].append(graph)
    return parts


def corpus_stats(graphs: list[InstanceGraph]) -> dict:
    """Per-split graph counts and average node/edge counts."""
    stats = {}
    for split, part in split_graphs(graphs).items():
        if not part:
            stats[split] = {"graphs": 0, "avg_nodes": 0.0, "avg_edges": 0.0}
            continue
        stats[split] = {
            "graphs": len(part),
            "avg_nodes": sum(g.num_nodes for g in part) / len(part),
            "avg_edges": sum(g.num_edges for g in part) / len(part),
        }
    return stats


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a random synthetic corpus."""

    n_event_types: int = 67
    n_graphs: int = 100
    min_nodes: int = 4
    max_nodes: int = 8
    edge_density: float = 0.3
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    type_prefix: str = "EV"

    def __post_init__(self):
        if self.n_event_types < 1:
            raise ConfigError("n_event_types must be >= 1")
        if self.n_graphs < 1:
            raise ConfigError("n_graphs must be >= 1")
        if not 1 <= self.min_nodes <= self.max_nodes:
            raise ConfigError(
                f"need 1 <= min_nodes <= max_nodes, got [{self.min_nodes}, {self.max_nodes}]"
            )
        if not 0.0 <= self.edge_density <= 1.0:
            raise ConfigError(f"edge_density must lie in [0, 1], got {self.edge_density}")
        if len(self.split_fractions) != 3 or any(f < 0 for f in self.split_fractions):
            raise ConfigError("split_fractions must be three non-negative numbers")
        if not math.isclose(sum(self.split_fractions), 1.0, abs_tol=1e-9):
            raise ConfigError("split_fractions must sum to 1")


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int):
    """Random DAG corpus: hidden linear order plus forward coin-flip edges.

    Node labels are presented in a random permutation so that the hidden
    order is not simply index order. Deterministic for a fixed spec and seed.
    """
    rng = np.random.default_rng(seed)
    width = max(2, len(str(spec.n_event_types - 1)))
    ontology = EventOntology.from_event_types(
        f"{spec.type_prefix}{i:0{width}d}" for i in range(spec.n_event_types)
    )

    n_train = int(round(spec.split_fractions[0] * spec.n_graphs))
    n_val = int(round(spec.split_fractions[1] * spec.n_graphs))
    n_train = min(n_train, spec.n_graphs)
    n_val = min(n_val, spec.n_graphs - n_train)

    graphs = []
    for k in range(spec.n_graphs):
        n = int(rng.integers(spec.min_nodes, spec.max_nodes + 1))
        types = rng.integers(0, spec.n_event_types, size=n)
        hidden = rng.permutation(n)
        edges = set()
        for p in range(n):
            for q in range(p + 1, n):
                if rng.random() < spec.edge_density:
                    edges.add((int(hidden[p]), int(hidden[q])))
        split = "train" if k < n_train else ("val" if k < n_train + n_val else "test")
        graphs.append(
            InstanceGraph(
                [int(t) for t in types],
                edges,
                graph_id=f"synth-{k:04d}",
                split=split,
            )
        )
    return ontology, graphs
