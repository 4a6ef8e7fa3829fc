"""Seeding helpers.

Every stochastic routine in the package takes an explicit seed or generator;
nothing reads or mutates global RNG state. Child seeds are derived from a
master seed plus a context key so that independent stages (noise draws,
shuffling, candidate sampling) never share a stream.
"""

from __future__ import annotations

import zlib

import numpy as np
import torch


def derive_seed(*parts) -> int:
    """Deterministically derive a child seed from integer or string parts."""
    entropy = []
    for part in parts:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def torch_generator(seed) -> torch.Generator:
    """CPU generator seeded with ``seed``."""
    gen = torch.Generator()
    gen.manual_seed(int(seed))
    return gen


def as_torch_generator(source) -> torch.Generator | None:
    """Accept a generator, an integer seed, or None (global RNG)."""
    if source is None or isinstance(source, torch.Generator):
        return source
    return torch_generator(source)


def enable_determinism():
    """Force single-threaded, deterministic torch kernels."""
    torch.set_num_threads(1)
    torch.use_deterministic_algorithms(True)
