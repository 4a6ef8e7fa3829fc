"""Generated schema skeletons and their JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import DataError
from .graphs import InstanceGraph
from .ontology import EventOntology

SCHEMA_FORMAT = "skeldiff-schema"
SCHEMA_VERSION = 1


@dataclass
class Schema:
    """An event skeleton: typed nodes plus forward edges.

    Nodes are listed in generation order and every edge (i, j) satisfies
    i < j, so a schema is acyclic by construction. Types are real event
    types; PAD never appears in a schema.
    """

    node_types: list[int]
    edges: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self):
        self.node_types = [int(t) for t in self.node_types]
        self.edges = {(int(i), int(j)) for i, j in self.edges}
        n = len(self.node_types)
        if any(t < 0 for t in self.node_types):
            raise DataError("schema: negative event type index")
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"schema: edge ({i}, {j}) out of range")
            if i >= j:
                raise DataError(f"schema: edge ({i}, {j}) must point forward")

    @property
    def num_nodes(self) -> int:
        return len(self.node_types)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def type_set(self) -> set[int]:
        return set(self.node_types)

    def to_instance_graph(self, graph_id: str = "schema", split: str = "test") -> InstanceGraph:
        return InstanceGraph(list(self.node_types), set(self.edges), graph_id=graph_id, split=split)


def schema_to_dict(schema: Schema, ontology: EventOntology, provenance: dict | None = None) -> dict:
    for t in schema.node_types:
        if ontology.is_pad(t) or t >= ontology.size:
            raise DataError(f"schema: type index {t} is not a real event type")
    return {
        "format": SCHEMA_FORMAT,
        "version": SCHEMA_VERSION,
        "nodes": [ontology.name_of(t) for t in schema.node_types],
        "edges": sorted([i, j] for i, j in schema.edges),
        "provenance": dict(provenance or {}),
    }


def schema_from_dict(payload: dict, ontology: EventOntology) -> tuple[Schema, dict]:
    if not isinstance(payload, dict) or payload.get("format") != SCHEMA_FORMAT:
        raise DataError("not a schema file")
    try:
        nodes = payload["nodes"]
        edges = payload["edges"]
    except KeyError as exc:
        raise DataError(f"schema file missing key {exc}") from None
    types = [ontology.index_of(name) for name in nodes]
    if any(ontology.is_pad(t) for t in types):
        raise DataError("schema file contains PAD nodes")
    schema = Schema(types, {(int(i), int(j)) for i, j in edges})
    return schema, dict(payload.get("provenance", {}))


def save_schema(path, schema: Schema, ontology: EventOntology, provenance: dict | None = None):
    payload = schema_to_dict(schema, ontology, provenance)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_schema(path, ontology: EventOntology) -> tuple[Schema, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"schema file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    return schema_from_dict(payload, ontology)
