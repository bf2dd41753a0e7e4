# locscale/common/workers.py

from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, Optional, TypeVar

from . import config

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Applies `fn` to every item and returns the results in input order.

    Work is spread over a thread pool sized by LOCSCALE_THREADS. Each call of
    `fn` must be self-contained (no shared accumulators), so the output does
    not depend on how the pool schedules it.
    """
    items = list(items)
    workers = threads if threads is not None else config.thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items)
