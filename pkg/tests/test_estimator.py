import pytest
import torch
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from skeldiff import (
    DataError,
    FrequencyBasedSampler,
    InstanceGraph,
    Schema,
    SchemaDiffusionModel,
)


@pytest.fixture
def corpus():
    return [
        InstanceGraph([0, 1, 2], {(0, 1), (1, 2)}, graph_id="t0", split="train"),
        InstanceGraph([2, 0, 1], {(0, 1), (0, 2)}, graph_id="t1", split="train"),
        InstanceGraph([0, 1], {(0, 1)}, graph_id="v0", split="val"),
        InstanceGraph([1, 2], {(0, 1)}, graph_id="e0", split="test"),
    ]


def tiny_estimator(**overrides):
    params = dict(
        dim=8,
        n_layers=1,
        max_nodes=4,
        n_steps=5,
        lr=1e-3,
        epochs=2,
        batch_size=2,
        n_candidates=2,
        val_candidates=1,
        random_state=0,
    )
    params.update(overrides)
    return SchemaDiffusionModel(**params)


class TestSklearnContract:
    def test_get_set_params_round_trip(self):
        est = tiny_estimator()
        params = est.get_params()
        assert params["dim"] == 8
        est.set_params(dim=16, epochs=3)
        assert est.dim == 16 and est.epochs == 3

    def test_clone(self):
        est = tiny_estimator(lambda_struct=0.5)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_unfitted_raises(self, corpus):
        est = tiny_estimator()
        with pytest.raises(NotFittedError):
            est.sample(1)
        with pytest.raises(NotFittedError):
            est.generate_schema()
        with pytest.raises(NotFittedError):
            est.score(corpus)


class TestFit:
    def test_fit_sets_attributes_and_returns_self(self, corpus, ontology):
        est = tiny_estimator()
        assert est.fit(corpus, ontology) is est
        assert est.ontology_ is ontology
        assert est.model_.config.dim == 8
        assert len(est.report_.loss_total) == 2
        assert est.val_graphs_[0].graph_id == "v0"

    def test_fit_without_val_split_selects_on_train(self, ontology):
        graphs = [InstanceGraph([0, 1], {(0, 1)}, graph_id="a", split="train")]
        est = tiny_estimator()
        est.fit(graphs, ontology)
        assert [g.graph_id for g in est.val_graphs_] == ["a"]

    def test_fit_without_train_split_rejected(self, ontology):
        graphs = [InstanceGraph([0], set(), split="test")]
        with pytest.raises(DataError, match="train split"):
            tiny_estimator().fit(graphs, ontology)

    def test_fit_truncates_oversize_graphs(self, ontology):
        graphs = [
            InstanceGraph(
                [0, 1, 2, 3, 0, 1], {(i, i + 1) for i in range(5)}, graph_id="big",
                split="train",
            )
        ]
        est = tiny_estimator()
        with pytest.warns(UserWarning, match="truncating"):
            est.fit(graphs, ontology)

    def test_fit_oversize_error_mode(self, ontology):
        graphs = [
            InstanceGraph([0, 1, 2, 3, 0], set(), graph_id="big", split="train")
        ]
        with pytest.raises(DataError, match="more than"):
            tiny_estimator(oversize="error").fit(graphs, ontology)

    def test_augmented_fit_runs(self, corpus, ontology):
        est = tiny_estimator(augment=3)
        est.fit(corpus, ontology)
        assert len(est.report_.loss_total) == 2

    def test_deterministic_in_random_state(self, corpus, ontology):
        a = tiny_estimator().fit(corpus, ontology)
        b = tiny_estimator().fit(corpus, ontology)
        for pa, pb in zip(a.model_.parameters(), b.model_.parameters()):
            assert torch.equal(pa, pb)
        assert a.report_.loss_total == b.report_.loss_total


class TestSampling:
    def test_sample_returns_schemas(self, corpus, ontology):
        est = tiny_estimator().fit(corpus, ontology)
        out = est.sample(3)
        assert len(out) == 3
        assert all(isinstance(s, Schema) for s in out)

    def test_sample_deterministic_given_state(self, corpus, ontology):
        est = tiny_estimator().fit(corpus, ontology)
        a = est.sample(2, random_state=5)
        b = est.sample(2, random_state=5)
        assert [(s.node_types, sorted(s.edges)) for s in a] == [
            (s.node_types, sorted(s.edges)) for s in b
        ]

    def test_generate_schema_caches_and_scores(self, corpus, ontology):
        est = tiny_estimator().fit(corpus, ontology)
        schema = est.generate_schema()
        assert est.schema_ is schema
        score = est.score([g for g in corpus if g.split == "test"])
        assert 0.0 <= score <= 1.0

    def test_score_generates_lazily(self, corpus, ontology):
        est = tiny_estimator().fit(corpus, ontology)
        assert not hasattr(est, "schema_")
        score = est.score(corpus)
        assert hasattr(est, "schema_")
        assert 0.0 <= score <= 1.0


class TestFrequencyBaseline:
    def test_fit_counts_train_split_only(self, corpus, ontology):
        est = FrequencyBasedSampler().fit(corpus, ontology)
        # Edges: t0 has (0,1),(1,2); t1 has (2,0),(2,1); val/test excluded.
        assert est.table_.counts == {(0, 1): 1, (1, 2): 1, (2, 0): 1, (2, 1): 1}

    def test_sample_is_deterministic(self, corpus, ontology):
        est = FrequencyBasedSampler(random_state=3).fit(corpus, ontology)
        a = est.sample(4)
        b = est.sample(4)
        assert [(s.node_types, sorted(s.edges)) for s in a] == [
            (s.node_types, sorted(s.edges)) for s in b
        ]

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            FrequencyBasedSampler().sample(1)

    def test_score_in_range(self, corpus, ontology):
        est = FrequencyBasedSampler().fit(corpus, ontology)
        assert 0.0 <= est.score(corpus) <= 1.0

    def test_clone(self):
        est = FrequencyBasedSampler(prune_isolated=True)
        assert clone(est).get_params() == est.get_params()
