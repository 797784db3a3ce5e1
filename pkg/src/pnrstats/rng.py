"""Deterministic random substreams.

All simulation stages draw from generators keyed by ``(seed, stage, block)``
so that the output does not depend on how many worker threads process the
blocks, nor on the order in which they finish.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 16

T = TypeVar("T")


def _key_part(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    if part < 0:
        raise ValueError("substream key parts must be non-negative")
    return part


def substream(seed: int, *key) -> np.random.Generator:
    """Return an independent generator for ``seed`` and a stage/block key.

    String key parts are hashed with CRC-32, which is stable across Python
    processes (unlike ``hash``).
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key) -> int:
    """A 63-bit seed for a named sub-stage, e.g. ``derive_seed(seed, "detector1")``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def blocks(n: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """Split ``range(n)`` into ``(block_index, start, stop)`` triples."""
    return [(i, start, min(start + block_size, n))
            for i, start in enumerate(range(0, n, block_size))]


def map_blocks(func: Callable[[int, int, int], T], n: int, workers: int = 1,
               block_size: int = BLOCK_SIZE) -> list[T]:
    """Apply ``func(block_index, start, stop)`` over all blocks, in block order."""
    parts: Iterable[tuple[int, int, int]] = blocks(n, block_size)
    if workers <= 1:
        return [func(*b) for b in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: func(*b), parts))
