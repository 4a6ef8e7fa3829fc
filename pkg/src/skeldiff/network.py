"""The denoising network: embeddings, attention encoders, and edge scorer.

The network reads a noisy latent sequence (one row per node slot), adds
learned position and step embeddings, and passes the result through a
shared attention encoder followed by two heads: a type path whose output
lives in embedding space (type logits come from a dot product against the
tied event-embedding table) and a structure path whose pairwise scores
drive edge decoding.

Attention is dense over all slots: while denoising, the graph structure is
unknown, so no adjacency mask is applied.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

from .exceptions import ConfigError, DataError, NumericError
from .utils import as_torch_generator

LEAKY_SLOPE = 0.2

_ACTIVATIONS = {
    "elu": F.elu,
    "relu": F.relu,
    "identity": lambda x: x,
}

_DTYPES = {"float32": torch.float32, "float64": torch.float64}

CHECKPOINT_FORMAT = "skeldiff-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture hyperparameters.

    ``n_types`` counts the padded vocabulary (real types plus PAD),
    ``max_nodes`` is the fixed sequence length, ``n_steps`` the number of
    refinement steps whose embeddings are learned.
    """

    n_types: int
    dim: int = 256
    n_layers: int = 4
    max_nodes: int = 50
    n_steps: int = 100
    activation: str = "elu"
    residual: bool = False
    dtype: str = "float32"

    def __post_init__(self):
        if self.n_types < 2:
            raise ConfigError("vocabulary must hold at least one real type plus PAD")
        for name in ("dim", "n_layers", "max_nodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n_steps < 2:
            raise ConfigError("n_steps must be >= 2")
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.dtype not in _DTYPES:
            raise ConfigError(f"unknown dtype {self.dtype!r}")

    @property
    def torch_dtype(self) -> torch.dtype:
        return _DTYPES[self.dtype]


class GraphAttentionLayer(nn.Module):
    """Single-head dense attention over all positions.

    The pair score for positions (i, j) is LeakyReLU(a . [W h_i, W h_j]);
    scores are normalized with a softmax over j, so each row of the
    attention matrix lies on the simplex. The weighted sum of projected
    inputs passes through the output activation. An optional additive skip
    connection is off by default.
    """

    def __init__(self, dim: int, activation: str = "elu", residual: bool = False):
        super().__init__()
        self.dim = dim
        self.activation = activation
        self.residual = residual
        self.weight = nn.Parameter(torch.empty(dim, dim))
        self.attn = nn.Parameter(torch.empty(2 * dim))

    def reset_parameters(self, generator=None):
        bound_w = self.dim**-0.5
        bound_a = (2 * self.dim) ** -0.5
        with torch.no_grad():
            self.weight.copy_(_uniform(self.weight, bound_w, generator))
            self.attn.copy_(_uniform(self.attn, bound_a, generator))

    def attention_weights(self, h: torch.Tensor):
        """Return (attention rows, projected inputs)."""
        wh = h @ self.weight.T
        left = wh @ self.attn[: self.dim]
        right = wh @ self.attn[self.dim :]
        scores = F.leaky_relu(left.unsqueeze(-1) + right.unsqueeze(-2), LEAKY_SLOPE)
        return torch.softmax(scores, dim=-1), wh

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        alpha, wh = self.attention_weights(h)
        out = _ACTIVATIONS[self.activation](alpha @ wh)
        return h + out if self.residual else out


class AttentionEncoder(nn.Module):
    """Stack of attention layers shared by the three encoding paths."""

    def __init__(self, dim, n_layers, activation="elu", residual=False, name="encoder"):
        super().__init__()
        self.name = name
        self.layers = nn.ModuleList(
            GraphAttentionLayer(dim, activation, residual) for _ in range(n_layers)
        )

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        if not torch.isfinite(h).all():
            raise NumericError(f"{self.name}: non-finite input")
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if not torch.isfinite(h).all():
                raise NumericError(f"{self.name} layer {i}: non-finite activations")
        return h


class EdgeScorer(nn.Module):
    """Two-layer perceptron scoring directed edges from endpoint pairs.

    The score for (i, j) reads the concatenation [h_i, h_j], so it is not
    symmetric in its arguments; a sigmoid keeps it in (0, 1).
    """

    def __init__(self, dim: int):
        super().__init__()
        self.hidden = nn.Linear(2 * dim, dim)
        self.out = nn.Linear(dim, 1)

    def reset_parameters(self, generator=None):
        with torch.no_grad():
            for layer in (self.hidden, self.out):
                bound = layer.weight.shape[1] ** -0.5
                layer.weight.copy_(_uniform(layer.weight, bound, generator))
                layer.bias.copy_(_uniform(layer.bias, bound, generator))

    def forward(self, pair: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.out(F.elu(self.hidden(pair)))).squeeze(-1)

    def score_pairs(self, h: torch.Tensor) -> torch.Tensor:
        """All-pairs score matrix: out[..., i, j] scores the edge i -> j."""
        m, d = h.shape[-2], h.shape[-1]
        left = h.unsqueeze(-2).expand(*h.shape[:-2], m, m, d)
        right = h.unsqueeze(-3).expand(*h.shape[:-2], m, m, d)
        return self.forward(torch.cat((left, right), dim=-1))


def _uniform(like: torch.Tensor, bound: float, generator=None) -> torch.Tensor:
    u = torch.rand(like.shape, generator=generator, dtype=like.dtype)
    return (u * 2.0 - 1.0) * bound


def _normal(like: torch.Tensor, std: float, generator=None) -> torch.Tensor:
    return torch.randn(like.shape, generator=generator, dtype=like.dtype) * std


class EventDenoiser(nn.Module):
    """Denoiser over padded event sequences.

    Holds the tied event-embedding table, learned position and step
    embeddings, the shared/type/structure encoders, and the edge scorer.
    All tensors use the dtype named in the config.
    """

    def __init__(self, config: NetworkConfig, seed: int | None = None):
        super().__init__()
        self.config = config
        d = config.dim
        self.event_emb = nn.Parameter(torch.empty(config.n_types, d))
        self.pos_emb = nn.Parameter(torch.empty(config.max_nodes, d))
        self.step_emb = nn.Parameter(torch.empty(config.n_steps, d))
        self.enc_shared = AttentionEncoder(
            d, config.n_layers, config.activation, config.residual, name="shared encoder"
        )
        self.enc_type = AttentionEncoder(
            d, config.n_layers, config.activation, config.residual, name="type encoder"
        )
        self.enc_struct = AttentionEncoder(
            d, config.n_layers, config.activation, config.residual, name="structure encoder"
        )
        self.edge_scorer = EdgeScorer(d)
        self.to(config.torch_dtype)
        self.reset_parameters(seed)

    def reset_parameters(self, seed: int | None = None):
        gen = as_torch_generator(seed)
        std = self.config.dim**-0.5
        with torch.no_grad():
            for table in (self.event_emb, self.pos_emb, self.step_emb):
                table.copy_(_normal(table, std, gen))
        for enc in (self.enc_shared, self.enc_type, self.enc_struct):
            for layer in enc.layers:
                layer.reset_parameters(gen)
        self.edge_scorer.reset_parameters(gen)

    def embed(self, sequences: torch.Tensor) -> torch.Tensor:
        """Event-type indices (..., m) to embedding rows (..., m, d)."""
        sequences = torch.as_tensor(sequences, dtype=torch.long)
        if sequences.numel() and (
            int(sequences.min()) < 0 or int(sequences.max()) >= self.config.n_types
        ):
            raise DataError("event type index out of vocabulary")
        return F.embedding(sequences, self.event_emb)

    def assemble(self, xt: torch.Tensor, t) -> torch.Tensor:
        """Add position and step embeddings to a latent sequence.

        ``t`` is a 1-based int for the whole batch or a tensor with one
        step per batch entry.
        """
        if xt.shape[-2:] != (self.config.max_nodes, self.config.dim):
            raise ConfigError(
                f"latent shape {tuple(xt.shape[-2:])} does not match "
                f"({self.config.max_nodes}, {self.config.dim})"
            )
        if isinstance(t, torch.Tensor) and t.dim() > 0:
            if int(t.min()) < 1 or int(t.max()) > self.config.n_steps:
                raise ConfigError(f"step out of range [1, {self.config.n_steps}]")
            step = self.step_emb[t - 1].unsqueeze(-2)
        else:
            t = int(t)
            if not 1 <= t <= self.config.n_steps:
                raise ConfigError(f"step {t} out of range [1, {self.config.n_steps}]")
            step = self.step_emb[t - 1]
        return xt + self.pos_emb + step

    def encode(self, h: torch.Tensor):
        """Run the shared encoder then both heads; returns (shared, type, structure)."""
        h_shared = self.enc_shared(h)
        return h_shared, self.enc_type(h_shared), self.enc_struct(h_shared)

    def type_path(self, xt: torch.Tensor, t) -> torch.Tensor:
        """Assemble then encode, returning only the type representation."""
        return self.enc_type(self.enc_shared(self.assemble(xt, t)))

    def type_logits(self, h_type: torch.Tensor) -> torch.Tensor:
        """Dot products against the tied embedding table: (..., m, n_types)."""
        return h_type @ self.event_emb.T

    def edge_scores(self, h_struct: torch.Tensor) -> torch.Tensor:
        return self.edge_scorer.score_pairs(h_struct)


def save_checkpoint(model: EventDenoiser, path):
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "state_dict": model.state_dict(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path) -> EventDenoiser:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise DataError(f"{path}: cannot read checkpoint ({exc})") from None
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path}: not a model checkpoint")
    try:
        config = NetworkConfig(**payload["config"])
        model = EventDenoiser(config, seed=0)
        model.load_state_dict(payload["state_dict"])
    except (KeyError, TypeError, RuntimeError) as exc:
        raise DataError(f"{path}: malformed checkpoint ({exc})") from None
    return model


def parameter_fingerprint(model: nn.Module) -> str:
    """Stable hex digest of all parameter values; identifies a checkpoint."""
    digest = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        digest.update(name.encode("utf-8"))
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()[:16]
