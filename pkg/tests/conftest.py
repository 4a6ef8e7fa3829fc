import numpy as np
import pytest
import torch

from skeldiff import EventDenoiser, EventOntology, InstanceGraph, NetworkConfig


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)


@pytest.fixture
def ontology():
    return EventOntology.from_event_types(["A", "B", "C", "D"])


@pytest.fixture
def diamond(ontology):
    # 0 -> {1, 2} -> 3, two valid orders
    return InstanceGraph([0, 1, 2, 3], {(0, 1), (0, 2), (1, 3), (2, 3)}, graph_id="diamond")


@pytest.fixture
def tiny_model(ontology):
    return EventDenoiser(
        NetworkConfig(n_types=ontology.size, dim=8, n_layers=2, max_nodes=6, n_steps=10),
        seed=0,
    )


def random_dag(rng: np.random.Generator, n_nodes: int, n_types: int, density: float = 0.3):
    """Forward-edge DAG over a hidden random order; used as a test oracle input."""
    types = [int(t) for t in rng.integers(0, n_types, size=n_nodes)]
    hidden = rng.permutation(n_nodes)
    edges = set()
    for p in range(n_nodes):
        for q in range(p + 1, n_nodes):
            if rng.random() < density:
                edges.add((int(hidden[p]), int(hidden[q])))
    return types, edges
