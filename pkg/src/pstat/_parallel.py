"""Order-preserving thread map capped by ``PSTAT_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker cap from ``PSTAT_THREADS``; 0 or unset means ``os.cpu_count()``."""
    try:
        n = int(os.environ.get("PSTAT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def ordered_map(func, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
