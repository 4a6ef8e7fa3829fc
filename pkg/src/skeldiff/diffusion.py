"""Noise schedule and forward-process sampling in the latent space.

The forward process first lifts a type sequence into continuous space by
adding isotropic noise around its embedding rows, then interpolates toward
pure noise according to a square-root retention schedule: at step t out of
T, a fraction ``alpha_bar(t) = 1 - sqrt(t / T)`` of the clean signal
remains. The last step retains nothing, so the final latent is standard
Gaussian regardless of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from .exceptions import ConfigError
from .utils import as_torch_generator


@dataclass(frozen=True)
class NoiseSchedule:
    """Signal-retention coefficients for T refinement steps.

    ``alpha_bar[k]`` is the retention at external step t = k + 1, strictly
    decreasing from ``1 - sqrt(1 / T)`` down to 0. ``beta_0`` is the
    variance of the initial embedding jitter, tied to the first step so the
    two ends of the process meet.
    """

    T: int
    alpha_bar: np.ndarray
    beta_0: float

    def __post_init__(self):
        object.__setattr__(self, "alpha_bar", np.asarray(self.alpha_bar, dtype=np.float64))
        if self.T < 2:
            raise ConfigError(f"number of steps must be >= 2, got {self.T}")
        if self.alpha_bar.shape != (self.T,):
            raise ConfigError("schedule length does not match T")
        if np.any(self.alpha_bar < 0) or np.any(self.alpha_bar > 1):
            raise ConfigError("retention coefficients must lie in [0, 1]")
        if np.any(np.diff(self.alpha_bar) >= 0):
            raise ConfigError("retention must be strictly decreasing")
        if not 0 < self.beta_0 <= 1:
            raise ConfigError(f"beta_0 must lie in (0, 1], got {self.beta_0}")

    def retention(self, t) -> float:
        """alpha_bar at external step t in [1, T]."""
        t = int(t)
        if not 1 <= t <= self.T:
            raise ConfigError(f"step {t} out of range [1, {self.T}]")
        return float(self.alpha_bar[t - 1])


def build_schedule(T: int) -> NoiseSchedule:
    """Square-root retention schedule over T steps."""
    if T < 2:
        raise ConfigError(f"number of steps must be >= 2, got {T}")
    steps = np.arange(1, T + 1, dtype=np.float64)
    alpha_bar = np.clip(1.0 - np.sqrt(steps / T), 0.0, 1.0)
    return NoiseSchedule(T=T, alpha_bar=alpha_bar, beta_0=float(1.0 - alpha_bar[0]))


def embed_sequence(sequence, table: torch.Tensor) -> torch.Tensor:
    """Look up one embedding row per event-type index."""
    idx = torch.as_tensor(sequence, dtype=torch.long)
    if idx.numel() and (int(idx.min()) < 0 or int(idx.max()) >= table.shape[0]):
        raise ConfigError("event type index out of vocabulary")
    return table[idx]


def sample_x0(e: torch.Tensor, beta_0: float, generator=None) -> torch.Tensor:
    """Jitter embeddings into the latent space: x0 = e + sqrt(beta_0) * z."""
    if not 0 < beta_0 <= 1:
        raise ConfigError(f"beta_0 must lie in (0, 1], got {beta_0}")
    gen = as_torch_generator(generator)
    noise = torch.randn(e.shape, generator=gen, dtype=e.dtype, device=e.device)
    return e + math.sqrt(beta_0) * noise


def sample_xt(x0: torch.Tensor, t, schedule: NoiseSchedule, generator=None) -> torch.Tensor:
    """Noise a latent to step t: xt = sqrt(ab) * x0 + sqrt(1 - ab) * z.

    ``t`` is an int applied to the whole batch, or a 1-D tensor with one
    step per leading batch entry.
    """
    gen = as_torch_generator(generator)
    if isinstance(t, torch.Tensor) and t.dim() > 0:
        if t.shape != x0.shape[:1]:
            raise ConfigError("per-sample steps must match the batch dimension")
        if int(t.min()) < 1 or int(t.max()) > schedule.T:
            raise ConfigError(f"step out of range [1, {schedule.T}]")
        ab = torch.as_tensor(schedule.alpha_bar, dtype=x0.dtype, device=x0.device)[t - 1]
        ab = ab.reshape(-1, *([1] * (x0.dim() - 1)))
    else:
        ab = torch.as_tensor(schedule.retention(t), dtype=x0.dtype, device=x0.device)
    noise = torch.randn(x0.shape, generator=gen, dtype=x0.dtype, device=x0.device)
    return torch.sqrt(ab) * x0 + torch.sqrt(1.0 - ab) * noise
