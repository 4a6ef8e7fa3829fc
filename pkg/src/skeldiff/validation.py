"""Input validation helpers shared by loaders, estimators, and the CLI.

Structural invariants (acyclicity, edge ranges, triangularity) are enforced
by the dataclasses themselves; these helpers add the checks that need an
ontology, plus isinstance guards with readable messages.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError
from .graphs import InstanceGraph, SortedGraph
from .ontology import EventOntology
from .schema import Schema


def check_ontology(ontology) -> EventOntology:
    if not isinstance(ontology, EventOntology):
        raise DataError(f"expected an EventOntology, got {type(ontology).__name__}")
    return ontology


def check_instance_graph(graph, ontology: EventOntology | None = None) -> InstanceGraph:
    if not isinstance(graph, InstanceGraph):
        raise DataError(f"expected an InstanceGraph, got {type(graph).__name__}")
    if ontology is not None:
        label = f"graph {graph.graph_id!r}" if graph.graph_id else "graph"
        for t in graph.node_types:
            if t >= ontology.size:
                raise DataError(f"{label}: event type index {t} out of vocabulary")
            if ontology.is_pad(t):
                raise DataError(f"{label}: PAD may not appear in an instance graph")
    return graph


def check_instance_graphs(graphs, ontology: EventOntology | None = None) -> list[InstanceGraph]:
    graphs = list(graphs)
    if not graphs:
        raise DataError("expected at least one graph")
    for graph in graphs:
        check_instance_graph(graph, ontology)
    return graphs


def check_sorted_graph(sorted_graph, ontology: EventOntology) -> SortedGraph:
    if not isinstance(sorted_graph, SortedGraph):
        raise DataError(f"expected a SortedGraph, got {type(sorted_graph).__name__}")
    seq = np.asarray(sorted_graph.sequence)
    k = sorted_graph.real_count
    if np.any(seq >= ontology.size) or np.any(seq < 0):
        raise DataError("sorted graph: event type index out of vocabulary")
    if np.any(seq[:k] == ontology.pad_index):
        raise DataError("sorted graph: PAD among the real positions")
    if np.any(seq[k:] != ontology.pad_index):
        raise DataError("sorted graph: padded positions must hold PAD")
    return sorted_graph


def check_schema(schema, ontology: EventOntology | None = None) -> Schema:
    if not isinstance(schema, Schema):
        raise DataError(f"expected a Schema, got {type(schema).__name__}")
    if ontology is not None:
        for t in schema.node_types:
            if t >= ontology.size:
                raise DataError(f"schema: event type index {t} out of vocabulary")
            if ontology.is_pad(t):
                raise DataError("schema: PAD may not appear in a schema")
    return schema
