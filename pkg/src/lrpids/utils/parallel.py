"""
lrpids Parallel Module.

Runs independent per-seed pipelines on a thread pool. numpy, scipy.linalg and
the JSON cache release the GIL for the heavy parts, so threads are enough and
the cache lock stays process-local. Results always come back in seed order.
"""

import concurrent.futures as cf
import logging
from typing import Callable, List, Optional, Sequence, TypeVar

from ..core.settings import get_settings

logger = logging.getLogger("lrpids")

T = TypeVar("T")


def map_seeds(fn: Callable[[int], T], seeds: Sequence[int], max_workers: Optional[int] = None) -> List[T]:
    """
    Applies fn to every seed and returns the results in the order of seeds.

    Args:
        fn: Per-seed pipeline.
        seeds: Seeds to process.
        max_workers: Pool size; defaults to LRPIDS_MAX_WORKERS.

    Returns:
        List[T]: fn(seed) for each seed, in input order.
    """
    workers = max_workers if max_workers is not None else get_settings().max_workers
    if workers <= 1 or len(seeds) <= 1:
        return [fn(seed) for seed in seeds]

    results: List[Optional[T]] = [None] * len(seeds)
    with cf.ThreadPoolExecutor(max_workers=workers) as ex:
        futs = {ex.submit(fn, seed): i for i, seed in enumerate(seeds)}
        for f in cf.as_completed(futs):
            results[futs[f]] = f.result()
    logger.debug(f"Processed {len(seeds)} seeds on {workers} threads")
    return results
