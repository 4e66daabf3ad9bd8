"""
Worker pool helper.

Per-sample work (critical points, pullback bases, John samples) is independent,
so it is mapped over a thread pool; results come back in input order whatever
the completion order, which keeps every report deterministic.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from tqdm import tqdm


class _SequentialExecutor:
    """Mimics ThreadPoolExecutor without starting threads."""

    def __init__(self, *args, **kwargs):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        return False

    @staticmethod
    def map(fn, *iterables):
        return map(fn, *iterables)


def resolve_threads(threads):
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def pmap(fn, items, threads=1, desc=None, progress=False):
    """
    Order-preserving map of `fn` over `items`.

    Args:
        fn: callable applied to every item; exceptions propagate to the caller.
        items: iterable of work items.
        threads: worker cap; 1 runs inline, 0/None uses every core.
        desc: progress-bar label.
        progress: show a tqdm bar (stderr).

    Returns:
        list of results in the order of `items`.
    """
    items = list(items)
    threads = min(resolve_threads(threads), max(1, len(items)))
    executor_cls = _SequentialExecutor if threads == 1 else ThreadPoolExecutor

    with executor_cls(max_workers=threads) as executor:
        results = executor.map(fn, items)
        if progress:
            results = tqdm(results, total=len(items), desc=desc, leave=False)
        return list(results)
