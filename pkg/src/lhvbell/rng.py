"""Counter-based random streams and chunked, worker-count-independent reduction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

CHUNK = 65536
_MASK64 = (1 << 64) - 1
# Philox4x64 yields four 64-bit words (four doubles) per counter step
_WORDS_PER_BLOCK = 4

T = TypeVar("T")


@dataclass(frozen=True)
class RngStream:
    """A reproducible stream of uniforms keyed by ``(seed, stream_index)``.

    The stream is a Philox4x64 counter sequence, so any window of it can be
    generated directly without touching the preceding values. Identical keys
    give bit-identical doubles on every platform.
    """

    seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.seed, (self.stream_index + index) & _MASK64)

    def uniforms(self, count: int, offset: int = 0) -> np.ndarray:
        """Doubles in [0, 1) (53-bit) at positions ``offset .. offset+count-1``."""
        if count < 0 or offset < 0:
            raise ValueError("count and offset must be non-negative")
        block, skip = divmod(offset, _WORDS_PER_BLOCK)
        bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream_index], dtype=np.uint64),
            counter=np.array([block & _MASK64, block >> 64, 0, 0], dtype=np.uint64),
        )
        return np.random.Generator(bitgen).random(count + skip)[skip:]


def chunk_bounds(n: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def map_chunks(
    n: int,
    fn: Callable[[int, int], T],
    workers: int = 1,
    chunk: int = CHUNK,
) -> list[T]:
    """Apply ``fn(lo, hi)`` over fixed chunks of ``range(n)``, results in chunk order.

    Chunk boundaries never depend on ``workers``, so any order-sensitive
    reduction over the returned list is reproducible.
    """
    bounds = chunk_bounds(n, chunk)
    if workers <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
