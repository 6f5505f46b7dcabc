"""Shard-level parallelism helpers.

Work is distributed per shard and merged in shard order, so thread count
never changes results.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import ValidationError

THREADS_ENV = "CURATE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(value: int | None = None) -> int:
    if value is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is not None:
            try:
                value = int(raw)
            except ValueError:
                raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}")
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise ValidationError(f"thread count must be positive, got {value}")
    return value


def map_ordered(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Apply `fn` to each item, preserving input order in the result."""
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
