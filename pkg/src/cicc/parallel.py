"""Order-preserving map over a process pool.

Results come back in input order whatever the worker count, so any
reduction done by the caller in index order is bit-identical.
"""

from concurrent.futures import ProcessPoolExecutor


def pmap(fn, items, workers: int = 1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
