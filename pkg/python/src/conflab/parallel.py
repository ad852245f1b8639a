"""Bounded process pool for replications, sweep points and brute-force grids.

``CONF_LAB_THREADS`` caps the number of worker processes; the default of 1
runs everything in the calling process. Work functions must live at module
level so they can be pickled.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

from .errors import ConfigInvalid

logger = logging.getLogger(__name__)

ENV_THREADS = "CONF_LAB_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigInvalid(
            ENV_THREADS, f"expected a positive integer, got {raw!r}"
        ) from None
    if value < 1:
        raise ConfigInvalid(ENV_THREADS, f"expected a positive integer, got {value}")
    return value


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``[fn(x) for x in items]``, fanned out over the pool when one is allowed.

    Results keep the input order whatever the completion order.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    logger.debug("Running %d tasks on %d worker processes", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
