# src/core/random.py
"""
Seed splitting.

One integer seed feeds every random component. Each component asks for a
named stream; the name is hashed into the SeedSequence spawn key and the
resulting key drives a counter-based Philox generator, so a component's
draws do not depend on what else consumed randomness before it.
"""

import zlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator]


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def make_rng(seed: int, *stream: Union[str, int]) -> np.random.Generator:
    """Generator for `seed` restricted to the named sub-stream"""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = tuple(stream_key(s) if isinstance(s, str) else int(s) for s in stream)
    sequence = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed))
