# utils/parallel.py

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """Worker threads allowed by BST_THREADS (defaults to the CPU count)."""
    raw = os.environ.get("BST_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Iterable[T], max_workers: int = None) -> List[R]:
    """
    Ordered map over a thread pool. Results come back in input order, so
    anything reduced from them is independent of the worker count.
    """
    items = list(items)
    workers = min(max_workers or thread_count(), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for one fixed-size work block, derived from (seed, block)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),)))
