"""Deterministic chunked work splitting.

Every parallel code path in the package partitions its index range into
fixed-size chunks and combines per-chunk results in chunk order. The
chunk grid never depends on the worker count, so results are bitwise
identical for any number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence, TypeVar

CHUNK = 1 << 16

T = TypeVar("T")


def chunk_ranges(n: int, chunk: int = CHUNK) -> Iterator[tuple[int, int]]:
    """Yield (start, stop) pairs covering range(n) in fixed-size chunks."""
    for start in range(0, n, chunk):
        yield start, min(start + chunk, n)


def run_chunked(
    fn: Callable[[int, int], T],
    n: int,
    workers: int = 1,
    chunk: int = CHUNK,
) -> list[T]:
    """Apply ``fn(start, stop)`` to every chunk of range(n).

    Results come back in chunk order regardless of scheduling, so any
    reduction over them is independent of ``workers``.
    """
    ranges = list(chunk_ranges(n, chunk))
    if workers <= 1 or len(ranges) <= 1:
        return [fn(s, e) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def run_indexed(
    fn: Callable[[int], T],
    count: int,
    workers: int = 1,
) -> list[T]:
    """Apply ``fn(i)`` for i in range(count), results in index order."""
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def derived_seed(*entropy: int) -> int:
    """Collapse a tuple of integers into a single 64-bit seed.

    Used to hand purpose-tagged substreams to APIs that accept one
    integer seed. Deterministic and stable across platforms.
    """
    import numpy as np

    key = [k & 0xFFFFFFFFFFFFFFFF for k in entropy]
    ss = np.random.SeedSequence(key)
    return int(ss.generate_state(1, np.uint64)[0])
