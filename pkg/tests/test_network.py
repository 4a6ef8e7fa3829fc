import math

import numpy as np
import pytest
import torch

from skeldiff import (
    ConfigError,
    DataError,
    EventDenoiser,
    NetworkConfig,
    NumericError,
    load_checkpoint,
    parameter_fingerprint,
    save_checkpoint,
)
from skeldiff.network import GraphAttentionLayer


def leaky(x, slope=0.2):
    return x if x >= 0 else slope * x


class TestAttentionLayer:
    def test_hand_computed_single_layer(self):
        # d=2, m=2, parameters set explicitly; activation disabled so the
        # aggregation itself is visible.
        layer = GraphAttentionLayer(2, activation="identity")
        with torch.no_grad():
            layer.weight.copy_(torch.tensor([[1.0, 0.0], [0.0, 2.0]]))
            layer.attn.copy_(torch.tensor([1.0, -1.0, 0.5, 0.0]))
        h = torch.tensor([[1.0, 2.0], [3.0, -1.0]])

        wh = np.array([[1.0, 4.0], [3.0, -2.0]])
        left = wh @ np.array([1.0, -1.0])
        right = wh @ np.array([0.5, 0.0])
        scores = np.array(
            [[leaky(left[i] + right[j]) for j in range(2)] for i in range(2)]
        )
        exp = np.exp(scores)
        alpha = exp / exp.sum(axis=1, keepdims=True)
        expected = alpha @ wh

        out = layer(h).detach().numpy()
        np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_attention_rows_lie_on_the_simplex(self):
        layer = GraphAttentionLayer(4)
        layer.reset_parameters(torch.Generator().manual_seed(0))
        h = torch.randn(7, 4, generator=torch.Generator().manual_seed(1))
        alpha, _ = layer.attention_weights(h)
        assert torch.all(alpha >= 0)
        assert torch.allclose(alpha.sum(-1), torch.ones(7), atol=1e-6)

    def test_zero_attention_vector_means_uniform_mixing(self):
        layer = GraphAttentionLayer(3, activation="identity")
        with torch.no_grad():
            layer.attn.zero_()
            layer.weight.copy_(torch.eye(3))
        h = torch.tensor([[3.0, 0.0, 0.0], [0.0, 6.0, 0.0], [0.0, 0.0, 9.0]])
        out = layer(h)
        expected = h.mean(0).expand(3, 3)
        assert torch.allclose(out, expected, atol=1e-6)

    def test_single_position_attends_to_itself(self):
        layer = GraphAttentionLayer(3)
        layer.reset_parameters(torch.Generator().manual_seed(2))
        h = torch.randn(1, 3, generator=torch.Generator().manual_seed(3))
        alpha, wh = layer.attention_weights(h)
        assert torch.allclose(alpha, torch.ones(1, 1))

    def test_residual_adds_the_input(self):
        plain = GraphAttentionLayer(3, activation="identity", residual=False)
        skip = GraphAttentionLayer(3, activation="identity", residual=True)
        gen = torch.Generator().manual_seed(4)
        plain.reset_parameters(gen)
        with torch.no_grad():
            skip.weight.copy_(plain.weight)
            skip.attn.copy_(plain.attn)
        h = torch.randn(5, 3, generator=torch.Generator().manual_seed(5))
        assert torch.allclose(skip(h), h + plain(h), atol=1e-6)


@pytest.fixture
def config():
    return NetworkConfig(n_types=5, dim=8, n_layers=2, max_nodes=6, n_steps=10)


class TestEventDenoiser:
    def test_seeded_init_is_reproducible(self, config):
        a = EventDenoiser(config, seed=11)
        b = EventDenoiser(config, seed=11)
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)
        c = EventDenoiser(config, seed=12)
        assert any(
            not torch.equal(pa, pc) for pa, pc in zip(a.parameters(), c.parameters())
        )

    def test_embed_looks_up_rows(self, config):
        model = EventDenoiser(config, seed=0)
        seq = torch.tensor([0, 3, 4, 4, 1, 2])
        assert torch.equal(model.embed(seq), model.event_emb[seq])

    def test_embed_rejects_out_of_vocabulary(self, config):
        model = EventDenoiser(config, seed=0)
        with pytest.raises(DataError):
            model.embed(torch.tensor([0, 5, 0, 0, 0, 0]))

    def test_assemble_adds_position_and_step(self, config):
        model = EventDenoiser(config, seed=0)
        xt = torch.randn(6, 8, generator=torch.Generator().manual_seed(0))
        out = model.assemble(xt, 3)
        expected = xt + model.pos_emb + model.step_emb[2]
        assert torch.allclose(out, expected)

    def test_assemble_with_per_sample_steps(self, config):
        model = EventDenoiser(config, seed=0)
        xt = torch.randn(2, 6, 8, generator=torch.Generator().manual_seed(1))
        out = model.assemble(xt, torch.tensor([3, 7]))
        assert torch.allclose(out[0], model.assemble(xt[0], 3))
        assert torch.allclose(out[1], model.assemble(xt[1], 7))

    def test_assemble_validates_step_and_shape(self, config):
        model = EventDenoiser(config, seed=0)
        xt = torch.randn(6, 8)
        with pytest.raises(ConfigError):
            model.assemble(xt, 0)
        with pytest.raises(ConfigError):
            model.assemble(xt, 11)
        with pytest.raises(ConfigError):
            model.assemble(torch.randn(5, 8), 1)

    def test_encode_returns_three_distinct_paths(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(2))
        h_sh, h_ty, h_st = model.encode(h)
        assert h_sh.shape == h_ty.shape == h_st.shape == (6, 8)
        assert not torch.allclose(h_ty, h_st)

    def test_heads_read_the_shared_representation(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(3))
        h_sh, h_ty, h_st = model.encode(h)
        assert torch.allclose(h_ty, model.enc_type(h_sh))
        assert torch.allclose(h_st, model.enc_struct(h_sh))

    def test_encode_is_bitwise_deterministic(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(4))
        a = model.encode(h)
        b = model.encode(h)
        for x, y in zip(a, b):
            assert torch.equal(x, y)

    def test_batched_encode_matches_single(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(3, 6, 8, generator=torch.Generator().manual_seed(5))
        batched = model.encode(h)
        for i in range(3):
            single = model.encode(h[i])
            for bx, sx in zip(batched, single):
                assert torch.allclose(bx[i], sx, atol=1e-6)

    def test_non_finite_input_raises_with_encoder_name(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.full((6, 8), float("nan"))
        with pytest.raises(NumericError, match="shared encoder"):
            model.encode(h)

    def test_type_logits_are_table_dot_products(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(6))
        logits = model.type_logits(h)
        assert logits.shape == (6, 5)
        expected = torch.stack(
            [h @ model.event_emb[k] for k in range(5)], dim=-1
        )
        assert torch.allclose(logits, expected, atol=1e-6)

    def test_edge_scores_in_unit_interval_and_asymmetric(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(7))
        scores = model.edge_scores(h)
        assert scores.shape == (6, 6)
        assert torch.all(scores > 0) and torch.all(scores < 1)
        assert not torch.allclose(scores, scores.T)

    def test_edge_scores_match_pairwise_forward(self, config):
        model = EventDenoiser(config, seed=0)
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(8))
        scores = model.edge_scores(h)
        for i in range(6):
            for j in range(6):
                pair = torch.cat((h[i], h[j]))
                assert torch.allclose(
                    scores[i, j], model.edge_scorer(pair), atol=1e-6
                )

    def test_float64_option(self):
        config = NetworkConfig(
            n_types=5, dim=8, n_layers=1, max_nodes=4, n_steps=5, dtype="float64"
        )
        model = EventDenoiser(config, seed=0)
        assert model.event_emb.dtype == torch.float64
        h = torch.randn(4, 8, dtype=torch.float64)
        assert model.encode(h)[1].dtype == torch.float64

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            NetworkConfig(n_types=1)
        with pytest.raises(ConfigError):
            NetworkConfig(n_types=5, dim=0)
        with pytest.raises(ConfigError):
            NetworkConfig(n_types=5, n_steps=1)
        with pytest.raises(ConfigError):
            NetworkConfig(n_types=5, activation="tanh")


class TestCheckpoint:
    def test_round_trip_preserves_outputs(self, config, tmp_path):
        model = EventDenoiser(config, seed=13)
        path = tmp_path / "model.pt"
        save_checkpoint(model, path)
        loaded = load_checkpoint(path)
        assert loaded.config == config
        h = torch.randn(6, 8, generator=torch.Generator().manual_seed(9))
        for a, b in zip(model.encode(h), loaded.encode(h)):
            assert torch.equal(a, b)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_checkpoint(tmp_path / "nope.pt")

    def test_garbage_file_rejected(self, tmp_path):
        path = tmp_path / "junk.pt"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(DataError):
            load_checkpoint(path)

    def test_foreign_payload_rejected(self, tmp_path):
        path = tmp_path / "other.pt"
        torch.save({"weights": torch.zeros(3)}, path)
        with pytest.raises(DataError, match="not a model checkpoint"):
            load_checkpoint(path)

    def test_fingerprint_tracks_parameters(self, config, tmp_path):
        model = EventDenoiser(config, seed=14)
        fp = parameter_fingerprint(model)
        assert fp == parameter_fingerprint(model)
        path = tmp_path / "model.pt"
        save_checkpoint(model, path)
        assert parameter_fingerprint(load_checkpoint(path)) == fp
        with torch.no_grad():
            model.event_emb.add_(1.0)
        assert parameter_fingerprint(model) != fp
