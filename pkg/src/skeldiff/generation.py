"""Reverse-process schema generation.

Starting from pure Gaussian noise, the latent sequence is refined through
all steps from T down to 1: each step re-assembles position and step
embeddings, runs the shared encoder, and feeds the type representation
back in as the next latent. After the last step the type rows are rounded
to their nearest event embedding, edges are decoded by thresholding the
pairwise scores of the structure head, and PAD slots are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .diffusion import NoiseSchedule
from .exceptions import ConfigError, DataError
from .metrics import event_type_f1
from .network import EventDenoiser
from .schema import Schema
from .utils import derive_seed, torch_generator

REFINE_SOURCES = ("type_representation", "structure_representation")


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for candidate sampling and edge decoding."""

    num_candidates: int = 500
    tau: float = 0.8
    seed: int = 0
    refine_source: str = "type_representation"

    def __post_init__(self):
        if self.num_candidates < 1:
            raise ConfigError("num_candidates must be >= 1")
        if not 0.0 < self.tau < 1.0:
            raise ConfigError(f"edge threshold must lie in (0, 1), got {self.tau}")
        if self.refine_source not in REFINE_SOURCES:
            raise ConfigError(
                f"refine_source must be one of {REFINE_SOURCES}, got {self.refine_source!r}"
            )


def round_to_types(h: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """Nearest embedding row per position, squared Euclidean, ties to the
    lower index."""
    distances = (h.unsqueeze(-2) - table).pow(2).sum(-1)
    return distances.argmin(-1)


def decode_schema(types: torch.Tensor, scores: torch.Tensor, tau: float, pad_index: int) -> Schema:
    """Threshold forward pair scores, drop PAD slots, and reindex.

    The surviving nodes keep their relative order, so edges keep pointing
    forward after renumbering.
    """
    m = int(types.shape[0])
    if scores.shape != (m, m):
        raise DataError(f"score matrix {tuple(scores.shape)} does not match {m} slots")
    kept = [i for i in range(m) if int(types[i]) != pad_index]
    rank = {i: r for r, i in enumerate(kept)}
    edges = {
        (rank[i], rank[j])
        for i in kept
        for j in kept
        if i < j and float(scores[i, j]) > tau
    }
    return Schema([int(types[i]) for i in kept], edges)


def generate_one(
    model: EventDenoiser,
    schedule: NoiseSchedule,
    config: GenerationConfig,
    seed: int,
    pad_index: int,
) -> Schema:
    """Sample a single schema from noise."""
    cfg = model.config
    if schedule.T != cfg.n_steps:
        raise DataError(
            f"schedule has {schedule.T} steps but the model expects {cfg.n_steps}"
        )
    if not 0 <= pad_index < cfg.n_types:
        raise DataError(f"pad_index {pad_index} out of vocabulary")

    gen = torch_generator(seed)
    use_type = config.refine_source == "type_representation"
    with torch.no_grad():
        latent = torch.randn(
            (cfg.max_nodes, cfg.dim), generator=gen, dtype=cfg.torch_dtype
        )
        for t in range(schedule.T, 0, -1):
            h_shared = model.enc_shared(model.assemble(latent, t))
            h_type = model.enc_type(h_shared)
            latent = h_type if use_type else model.enc_struct(h_shared)
        # The structure head runs once, on the final shared representation.
        h_struct = model.enc_struct(h_shared)
        types = round_to_types(h_type, model.event_emb)
        scores = model.edge_scores(h_struct)

    return decode_schema(types, scores, config.tau, pad_index)


def generate_candidates(
    model: EventDenoiser,
    schedule: NoiseSchedule,
    config: GenerationConfig,
    pad_index: int,
) -> list[Schema]:
    """Sample ``config.num_candidates`` schemas with per-candidate seeds
    derived from ``config.seed``."""
    return [
        generate_one(model, schedule, config, derive_seed(config.seed, k), pad_index)
        for k in range(config.num_candidates)
    ]


def candidate_scores(candidates: list[Schema], graphs) -> list[float]:
    """Mean event-type F1 of each candidate against the given graphs."""
    graphs = list(graphs)
    if not graphs:
        raise DataError("expected at least one graph to rank against")
    return [
        sum(event_type_f1(c, g) for g in graphs) / len(graphs) for c in candidates
    ]


def select_schema(candidates: list[Schema], graphs) -> Schema:
    """The candidate with the highest mean event-type F1; ties keep the
    earliest candidate."""
    if not candidates:
        raise DataError("expected at least one candidate")
    scores = candidate_scores(candidates, graphs)
    best = 0
    for k in range(1, len(scores)):
        if scores[k] > scores[best]:
            best = k
    return candidates[best]
