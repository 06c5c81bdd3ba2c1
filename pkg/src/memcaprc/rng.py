"""Named random streams derived from one 64-bit seed.

Each consumer asks for a stream by name; the name is hashed into the
SeedSequence spawn key, so adding a new consumer never shifts the draws of
existing ones. Streams use PCG64 and numpy's ziggurat normal sampler.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    if not 0 <= int(seed) < 2 ** 64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(key,))))


def as_generator(seed, name: str) -> np.random.Generator:
    """Accept an integer seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed, name)
