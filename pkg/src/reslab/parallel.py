"""Thread-level parallelism capped by the RESLAB_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """Worker threads to use: RESLAB_THREADS if set, else the CPU count."""
    raw = os.environ.get("RESLAB_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"RESLAB_THREADS must be an integer, got {raw!r}") from exc
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map fn over items, results in input order. Runs inline for one thread."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
