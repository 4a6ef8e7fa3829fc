"""Training losses and the denoising training loop.

The default objective draws one step t per graph, noises the embedded
sequence to that step, and scores two heads: cross-entropy of the type
logits against the true sequence, and a squared-error edge loss between
the pairwise structure scores and the sorted adjacency. An alternative
end-to-end objective replaces the type term with latent reconstruction
terms plus a rounding likelihood.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .diffusion import NoiseSchedule, sample_x0, sample_xt
from .exceptions import ConfigError, DataError, NumericError
from .generation import GenerationConfig, generate_candidates
from .graphs import SortedGraph
from .metrics import event_type_f1
from .network import EventDenoiser
from .utils import derive_seed, torch_generator

OBJECTIVES = ("simplified", "e2e")


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings.

    ``objective="simplified"`` is the two-term loss described above;
    ``"e2e"`` swaps the type term for the end-to-end reconstruction form.
    ``full_t_sum`` replaces the sampled step with an exact sum over all
    steps (slower by a factor of T, same expectation).
    """

    lr: float = 1e-4
    epochs: int = 100
    batch_size: int = 16
    lambda_struct: float = 1.0
    objective: str = "simplified"
    seed: int = 0
    t_sampling: str = "uniform"
    mask_pad: bool = False
    full_t_sum: bool = False
    val_candidates: int = 4
    val_every: int = 1
    val_tau: float = 0.8

    def __post_init__(self):
        if self.lr < 0:
            raise ConfigError(f"learning rate must be >= 0, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lambda_struct < 0:
            raise ConfigError("lambda_struct must be >= 0")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.t_sampling != "uniform":
            raise ConfigError(f"unsupported step sampling {self.t_sampling!r}")
        if self.val_candidates < 1 or self.val_every < 1:
            raise ConfigError("val_candidates and val_every must be >= 1")


def loss_type(
    h_type: torch.Tensor,
    targets: torch.Tensor,
    emb_table: torch.Tensor,
    mask_pad: bool = False,
    pad_index: int | None = None,
) -> torch.Tensor:
    """Mean cross-entropy of tied-embedding logits over sequence positions.

    By default every position counts, padded slots included; with
    ``mask_pad`` the mean runs over real positions only.
    """
    logits = h_type @ emb_table.T
    flat = logits.reshape(-1, logits.shape[-1])
    tgt = targets.reshape(-1)
    ce = F.cross_entropy(flat, tgt, reduction="none")
    if mask_pad:
        if pad_index is None:
            raise ConfigError("mask_pad requires pad_index")
        keep = (tgt != pad_index).to(ce.dtype)
        if float(keep.sum()) == 0.0:
            raise DataError("all positions are PAD; nothing to score")
        return (ce * keep).sum() / keep.sum()
    return ce.mean()


def loss_struct(scores: torch.Tensor, adjacency: torch.Tensor) -> torch.Tensor:
    """Mean squared edge-score error over ordered pairs i < j.

    Uses the fixed normalization 2 / (m - 1)^2 per sequence; a one-node
    sequence has no pairs and scores zero.
    """
    m = scores.shape[-1]
    if adjacency.shape[-2:] != (m, m):
        raise DataError("adjacency shape does not match the score matrix")
    if m < 2:
        return torch.zeros((), dtype=scores.dtype)
    mask = torch.triu(torch.ones(m, m, dtype=scores.dtype), diagonal=1)
    sq = (scores - adjacency.to(scores.dtype)).pow(2) * mask
    per_graph = sq.sum(dim=(-2, -1)) * (2.0 / (m - 1) ** 2)
    return per_graph.mean()


def denoising_losses(
    model: EventDenoiser,
    sequences: torch.Tensor,
    adjacency: torch.Tensor,
    t,
    schedule: NoiseSchedule,
    generator=None,
    mask_pad: bool = False,
    pad_index: int | None = None,
):
    """One forward pass of the simplified objective; returns (type, struct)."""
    e = model.embed(sequences)
    x0 = sample_x0(e, schedule.beta_0, generator)
    xt = sample_xt(x0, t, schedule, generator)
    _, h_type, h_struct = model.encode(model.assemble(xt, t))
    l_type = loss_type(h_type, sequences, model.event_emb, mask_pad, pad_index)
    l_struct = loss_struct(model.edge_scores(h_struct), adjacency)
    return l_type, l_struct


def e2e_losses(
    model: EventDenoiser,
    sequences: torch.Tensor,
    adjacency: torch.Tensor,
    t,
    schedule: NoiseSchedule,
    generator=None,
):
    """End-to-end reconstruction objective; returns (recon, struct).

    Three summed terms per sequence: squared distance between the clean
    latent and its prediction from step t >= 2; squared distance between
    the embedding and the prediction from step 1; and the rounding
    cross-entropy of an independently jittered latent, scored directly
    against the embedding table. The structure head is trained as usual.
    """
    if isinstance(t, torch.Tensor) and t.dim() > 0:
        t_min = int(t.min())
    else:
        t_min = int(t)
    if t_min < 2:
        raise ConfigError("the reconstruction term needs t >= 2")

    e = model.embed(sequences)
    x0 = sample_x0(e, schedule.beta_0, generator)
    xt = sample_xt(x0, t, schedule, generator)
    pred_t = model.type_path(xt, t)
    term_recon = (x0 - pred_t).pow(2).sum(dim=(-2, -1))

    x1 = sample_xt(sample_x0(e, schedule.beta_0, generator), 1, schedule, generator)
    pred_1 = model.type_path(x1, 1)
    term_anchor = (e - pred_1).pow(2).sum(dim=(-2, -1))

    x0_round = sample_x0(e, schedule.beta_0, generator)
    logits = x0_round @ model.event_emb.T
    ce = F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), sequences.reshape(-1), reduction="none"
    )
    term_round = ce.reshape(sequences.shape).sum(dim=-1)

    l_recon = (term_recon + term_anchor + term_round).mean()

    _, _, h_struct = model.encode(model.assemble(xt, t))
    l_struct = loss_struct(model.edge_scores(h_struct), adjacency)
    return l_recon, l_struct


@dataclass
class TrainReport:
    """Per-epoch loss traces plus the best validation checkpoint."""

    loss_total: list[float]
    loss_type: list[float]
    loss_struct: list[float]
    val_f1: list[float | None]
    best_epoch: int
    best_val_f1: float | None
    best_state: dict | None = field(repr=False, default=None)

    def __post_init__(self):
        n = len(self.loss_total)
        if not (len(self.loss_type) == len(self.loss_struct) == len(self.val_f1) == n):
            raise DataError("per-epoch traces must have equal length")
        for trace in (self.loss_total, self.loss_type, self.loss_struct):
            if any(not np.isfinite(v) for v in trace):
                raise NumericError("non-finite loss in the training trace")
        if not 0 <= self.best_epoch < max(n, 1):
            raise DataError(f"best_epoch {self.best_epoch} out of range")


def _stack_corpus(corpus: list[SortedGraph], model: EventDenoiser):
    if not corpus:
        raise DataError("training corpus is empty")
    m = model.config.max_nodes
    for sg in corpus:
        if sg.length != m:
            raise DataError(
                f"sorted graph has length {sg.length}, the model expects {m}"
            )
        if max(sg.sequence) >= model.config.n_types:
            raise DataError("event type index out of vocabulary")
    sequences = torch.tensor([sg.sequence for sg in corpus], dtype=torch.long)
    adjacency = torch.tensor(
        np.stack([sg.adjacency for sg in corpus]), dtype=model.config.torch_dtype
    )
    return sequences, adjacency




def train(
    corpus: list[SortedGraph],
    model: EventDenoiser,
    config: TrainConfig,
    schedule: NoiseSchedule,
    val_graphs=None,
    pad_index: int | None = None,
    on_epoch=None,
    verbose: bool = False,
) -> TrainReport:
    """Optimize the denoiser with Adam; track the best validation epoch.

    Validation generates ``val_candidates`` schemas every ``val_every``
    epochs and records the best mean event-type F1 against ``val_graphs``;
    the state dict of the best epoch is kept (final epoch when no
    validation runs). ``on_epoch`` receives one dict per epoch.
    """
    if schedule.T != model.config.n_steps:
        raise DataError(
            f"schedule has {schedule.T} steps but the model expects {model.config.n_steps}"
        )
    if val_graphs and pad_index is None:
        raise ConfigError("validation requires pad_index")
    if config.mask_pad and pad_index is None:
        raise ConfigError("mask_pad requires pad_index")

    sequences, adjacency = _stack_corpus(corpus, model)
    n = sequences.shape[0]
    T = schedule.T

    shuffle_rng = np.random.default_rng(derive_seed(config.seed, "shuffle"))
    noise_gen = torch_generator(derive_seed(config.seed, "noise"))
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.lr, betas=(0.9, 0.999), eps=1e-8
    )

    trace_total: list[float] = []
    trace_type: list[float] = []
    trace_struct: list[float] = []
    trace_val: list[float | None] = []
    best_epoch = -1
    best_val = None
    best_state = None

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        sums = np.zeros(3)
        count = 0
        for start in range(0, n, config.batch_size):
            idx = torch.as_tensor(order[start : start + config.batch_size])
            seq = sequences[idx]
            adj = adjacency[idx]
            t_low = 2 if config.objective == "e2e" else 1
            if config.full_t_sum:
                steps = torch.arange(t_low, T + 1)
                t = steps.repeat(len(idx))
                seq = seq.repeat_interleave(len(steps), dim=0)
                adj = adj.repeat_interleave(len(steps), dim=0)
            else:
                t = torch.randint(t_low, T + 1, (len(idx),), generator=noise_gen)
            if config.objective == "e2e":
                l_main, l_struct = e2e_losses(
                    model, seq, adj, t, schedule, noise_gen
                )
            else:
                l_main, l_struct = denoising_losses(
                    model, seq, adj, t, schedule, noise_gen,
                    config.mask_pad, pad_index,
                )
            loss = l_main + config.lambda_struct * l_struct
            if not torch.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            batch_n = len(idx)
            sums += batch_n * np.array(
                [loss.item(), l_main.item(), l_struct.item()]
            )
            count += batch_n

        trace_total.append(float(sums[0] / count))
        trace_type.append(float(sums[1] / count))
        trace_struct.append(float(sums[2] / count))

        val_score = None
        if val_graphs and (epoch + 1) % config.val_every == 0:
            val_score = _validate(
                model, schedule, config, val_graphs, pad_index, epoch
            )
            if best_val is None or val_score > best_val:
                best_val = val_score
                best_epoch = epoch
                best_state = copy.deepcopy(model.state_dict())
        trace_val.append(val_score)

        if verbose:
            msg = (
                f"epoch {epoch + 1}/{config.epochs} "
                f"loss {trace_total[-1]:.4f} type {trace_type[-1]:.4f} "
                f"struct {trace_struct[-1]:.4f}"
            )
            if val_score is not None:
                msg += f" val_f1 {val_score:.4f}"
            print(msg, file=sys.stderr)
        if on_epoch is not None:
            on_epoch(
                {
                    "epoch": epoch,
                    "loss": trace_total[-1],
                    "loss_type": trace_type[-1],
                    "loss_struct": trace_struct[-1],
                    "val_f1": val_score,
                }
            )

    if best_state is None:
        best_epoch = config.epochs - 1
        best_state = copy.deepcopy(model.state_dict())

    return TrainReport(
        loss_total=trace_total,
        loss_type=trace_type,
        loss_struct=trace_struct,
        val_f1=trace_val,
        best_epoch=best_epoch,
        best_val_f1=best_val,
        best_state=best_state,
    )


def _validate(model, schedule, config: TrainConfig, val_graphs, pad_index, epoch) -> float:
    gen_config = GenerationConfig(
        num_candidates=config.val_candidates,
        tau=config.val_tau,
        seed=derive_seed(config.seed, "val", epoch),
    )
    with torch.no_grad():
        candidates = generate_candidates(model, schedule, gen_config, pad_index)
    return max(
        sum(event_type_f1(c, g) for g in val_graphs) / len(val_graphs)
        for c in candidates
    )
