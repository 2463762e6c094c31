import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(threads: int) -> int:
    """0 means one worker per CPU."""
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, int(threads))


def ordered_map(fn, items, threads: int = 1) -> list:
    """map() over items, threaded when asked, always returning results in input order."""
    items = list(items)
    workers = min(worker_count(threads), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))
