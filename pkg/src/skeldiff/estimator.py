"""Scikit-learn style estimators over event-graph corpora.

``SchemaDiffusionModel`` wraps the denoising model: ``fit`` trains on the
train split of a corpus (selecting checkpoints against the val split),
``sample`` draws schema candidates, ``generate_schema`` picks the best one,
and ``score`` reports mean event-type F1. ``FrequencyBasedSampler`` is the
matching baseline.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .diffusion import build_schedule
from .exceptions import DataError
from .fbs import count_frequencies, fbs_schema
from .generation import (
    GenerationConfig,
    generate_candidates,
    select_schema,
)
from .graphs import augment_by_resorting, truncate_to_limit
from .metrics import event_type_f1
from .network import EventDenoiser, NetworkConfig
from .training import TrainConfig, train
from .utils import derive_seed
from .validation import check_instance_graphs, check_ontology


class SchemaDiffusionModel(BaseEstimator):
    """Generative model of event schemas trained by latent denoising.

    Parameters mirror the training and sampling knobs: embedding width
    ``dim``, ``n_layers`` attention layers per encoder, sequences padded to
    ``max_nodes``, ``n_steps`` refinement steps, structure loss weight
    ``lambda_struct``, and edge decoding threshold ``edge_threshold``.
    ``augment`` controls how many topological resortings of each training
    graph are used per epoch.
    """

    def __init__(
        self,
        dim=256,
        n_layers=4,
        max_nodes=50,
        n_steps=100,
        lambda_struct=1.0,
        edge_threshold=0.8,
        lr=1e-4,
        epochs=100,
        batch_size=16,
        n_candidates=500,
        objective="simplified",
        refine_source="type_representation",
        augment=1,
        residual=False,
        mask_pad=False,
        full_t_sum=False,
        val_candidates=4,
        val_every=1,
        oversize="truncate",
        dtype="float32",
        random_state=0,
        verbose=False,
    ):
        self.dim = dim
        self.n_layers = n_layers
        self.max_nodes = max_nodes
        self.n_steps = n_steps
        self.lambda_struct = lambda_struct
        self.edge_threshold = edge_threshold
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.n_candidates = n_candidates
        self.objective = objective
        self.refine_source = refine_source
        self.augment = augment
        self.residual = residual
        self.mask_pad = mask_pad
        self.full_t_sum = full_t_sum
        self.val_candidates = val_candidates
        self.val_every = val_every
        self.oversize = oversize
        self.dtype = dtype
        self.random_state = random_state
        self.verbose = verbose

    def fit(self, graphs, ontology, on_epoch=None):
        """Train on the train split; the val split (or, failing that, the
        train split itself) drives best-checkpoint selection."""
        ontology = check_ontology(ontology)
        graphs = check_instance_graphs(graphs, ontology)
        train_graphs = [g for g in graphs if g.split == "train"]
        val_graphs = [g for g in graphs if g.split == "val"]
        if not train_graphs:
            raise DataError("no graphs in the train split")
        if not val_graphs:
            val_graphs = train_graphs

        train_graphs = [
            truncate_to_limit(g, self.max_nodes, on_oversize=self.oversize)
            for g in train_graphs
        ]
        corpus = augment_by_resorting(
            train_graphs,
            self.augment,
            derive_seed(self.random_state, "augment"),
            m=self.max_nodes,
            pad_index=ontology.pad_index,
        )

        self.ontology_ = ontology
        self.schedule_ = build_schedule(self.n_steps)
        self.model_ = EventDenoiser(
            NetworkConfig(
                n_types=ontology.size,
                dim=self.dim,
                n_layers=self.n_layers,
                max_nodes=self.max_nodes,
                n_steps=self.n_steps,
                residual=self.residual,
                dtype=self.dtype,
            ),
            seed=derive_seed(self.random_state, "init"),
        )
        config = TrainConfig(
            lr=self.lr,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lambda_struct=self.lambda_struct,
            objective=self.objective,
            seed=derive_seed(self.random_state, "train"),
            mask_pad=self.mask_pad,
            full_t_sum=self.full_t_sum,
            val_candidates=self.val_candidates,
            val_every=self.val_every,
            val_tau=self.edge_threshold,
        )
        self.report_ = train(
            corpus,
            self.model_,
            config,
            self.schedule_,
            val_graphs=val_graphs,
            pad_index=ontology.pad_index,
            on_epoch=on_epoch,
            verbose=self.verbose,
        )
        self.model_.load_state_dict(self.report_.best_state)
        self.val_graphs_ = val_graphs
        return self

    def sample(self, n=None, random_state=None):
        """Draw schema candidates from noise; returns a list."""
        check_is_fitted(self)
        config = GenerationConfig(
            num_candidates=self.n_candidates if n is None else int(n),
            tau=self.edge_threshold,
            seed=(
                derive_seed(self.random_state, "generate")
                if random_state is None
                else int(random_state)
            ),
            refine_source=self.refine_source,
        )
        return generate_candidates(
            self.model_, self.schedule_, config, self.ontology_.pad_index
        )

    def generate_schema(self, graphs=None, n=None, random_state=None):
        """Sample candidates and keep the one scoring best against
        ``graphs`` (the val split seen at fit time by default)."""
        check_is_fitted(self)
        reference = self.val_graphs_ if graphs is None else list(graphs)
        candidates = self.sample(n=n, random_state=random_state)
        self.schema_ = select_schema(candidates, reference)
        return self.schema_

    def score(self, graphs) -> float:
        """Mean event-type F1 of the selected schema against ``graphs``."""
        check_is_fitted(self)
        graphs = list(graphs)
        if not graphs:
            raise DataError("expected at least one graph to score against")
        schema = getattr(self, "schema_", None)
        if schema is None:
            schema = self.generate_schema()
        return sum(event_type_f1(schema, g) for g in graphs) / len(graphs)


class FrequencyBasedSampler(BaseEstimator):
    """Baseline that samples edges proportionally to training frequency."""

    def __init__(self, max_draw_factor=10, prune_isolated=False, random_state=0):
        self.max_draw_factor = max_draw_factor
        self.prune_isolated = prune_isolated
        self.random_state = random_state

    def fit(self, graphs, ontology=None):
        if ontology is not None:
            ontology = check_ontology(ontology)
        graphs = check_instance_graphs(graphs, ontology)
        train_graphs = [g for g in graphs if g.split == "train"]
        if not train_graphs:
            raise DataError("no graphs in the train split")
        self.table_ = count_frequencies(train_graphs)
        self.ontology_ = ontology
        return self

    def sample(self, n=1, random_state=None):
        check_is_fitted(self)
        base = self.random_state if random_state is None else random_state
        return [
            fbs_schema(
                self.table_,
                derive_seed(base, "fbs", k),
                max_draw_factor=self.max_draw_factor,
                prune_isolated=self.prune_isolated,
            )
            for k in range(n)
        ]

    def score(self, graphs) -> float:
        """Mean event-type F1 of a single sampled schema against ``graphs``."""
        check_is_fitted(self)
        graphs = list(graphs)
        if not graphs:
            raise DataError("expected at least one graph to score against")
        schema = self.sample(1)[0]
        return sum(event_type_f1(schema, g) for g in graphs) / len(graphs)
