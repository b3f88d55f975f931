"""Order-preserving parallel map with a global worker cap."""
import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "WTFBF_THREADS"


def default_threads():
    try:
        return max(1, int(os.environ.get(ENV_THREADS, "1")))
    except ValueError:
        return 1


def pmap(fn, items, threads=None):
    """list(map(fn, items)) using up to `threads` workers; result order is input order."""
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
