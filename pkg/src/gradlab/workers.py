"""Worker pool for independent Monte Carlo and per-input work.

Results always come back in submission order, so reductions performed
by the caller are identical for any worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from .config.settings import Settings

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_count(settings: Optional[Settings] = None) -> int:
    return (settings or Settings.from_env()).threads


def map_ordered(
    fn: Callable[[T], R],
    items: Iterable[T],
    settings: Optional[Settings] = None,
) -> list[R]:
    """Apply *fn* to every item, possibly in parallel; results keep item order."""
    items = list(items)
    workers = min(worker_count(settings), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    log.debug("map_ordered: %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="gradlab") as pool:
        return list(pool.map(fn, items))


def blocks(total: int, size: int) -> list[range]:
    """Split ``range(total)`` into consecutive chunks of at most *size*."""
    return [range(start, min(start + size, total)) for start in range(0, total, size)]
