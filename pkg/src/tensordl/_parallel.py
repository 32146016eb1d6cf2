import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "TENSOR_DEFLATE_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Requested worker count, capped by ``TENSOR_DEFLATE_THREADS`` when set."""
    n = requested if requested is not None else 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap))) if requested is not None else max(1, int(cap))
        except ValueError:
            pass
    return max(1, n)


def ordered_map(fn, items, workers: int | None = None) -> list:
    """``list(map(fn, items))``, optionally threaded; output order always follows input order."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
