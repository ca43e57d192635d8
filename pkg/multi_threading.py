import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from contextlib import contextmanager

import numba

from config import get_kernel_config


def max_threads():
    """Largest worker count the numba runtime was started with."""
    return numba.config.NUMBA_NUM_THREADS


# Resolve the effective worker count
def resolve_thread_count(threads=None):
    """
    Turns a requested worker count into the effective one.

    :param threads: Requested count; None uses the configured default, 0 means all available.
    :return: Effective worker count (>= 1).
    """
    if threads is None:
        threads = get_kernel_config()['threads']
    if threads < 0:
        raise ValueError(f"Thread count must be >= 0, got {threads}")
    available = max_threads()
    if threads == 0:
        return available
    if threads > available:
        logging.warning(f"Requested {threads} threads but only {available} are available; using {available}.")
        return available
    return threads


# Scope numba's active thread count to a block of kernel calls
@contextmanager
def kernel_threads(threads=None):
    """
    Sets the number of threads used by parallel kernels inside the block and restores it afterwards.

    :param threads: Requested count (see resolve_thread_count).
    :yield: Effective worker count.
    """
    effective = resolve_thread_count(threads)
    previous = numba.get_num_threads()
    numba.set_num_threads(effective)
    logging.debug(f"Kernel threads set to {effective} (was {previous}).")
    try:
        yield effective
    finally:
        numba.set_num_threads(previous)


# Run independent chunks on a thread pool
def run_chunked(task, chunks, max_workers=None):
    """
    Executes task(chunk) for every chunk on a thread pool. Each task must write only its own output slice.

    :param task: Callable taking one chunk description.
    :param chunks: Iterable of chunk descriptions.
    :param max_workers: Number of worker threads (see resolve_thread_count).
    :raises: The first exception raised by any chunk, after all chunks finish.
    """
    chunks = list(chunks)
    if not chunks:
        return
    workers = min(resolve_thread_count(max_workers), len(chunks))
    if workers == 1:
        for chunk in chunks:
            task(chunk)
        return

    failure = None
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(task, chunk): chunk for chunk in chunks}
        for future in as_completed(futures):
            chunk = futures[future]
            try:
                future.result()
            except Exception as e:
                logging.error(f"Chunk {chunk} failed: {e}")
                if failure is None:
                    failure = e
    if failure is not None:
        raise failure
