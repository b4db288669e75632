import os


def worker_count(workers=None):
    """Number of synthesis workers.

    An explicit ``workers`` wins; otherwise the ``SYMDOCK_THREADS``
    environment variable caps the count, which defaults to the CPU count.
    """
    if workers is not None:
        if workers < 1:
            raise ValueError(f"Worker count must be positive, got {workers}")
        return int(workers)
    available = os.cpu_count() or 1
    limit = os.environ.get("SYMDOCK_THREADS")
    if limit is None or not limit.strip():
        return available
    try:
        limit = int(limit)
    except ValueError:
        raise ValueError(
            f"SYMDOCK_THREADS must be an integer, got {limit!r}"
        ) from None
    if limit < 1:
        raise ValueError(f"SYMDOCK_THREADS must be positive, got {limit}")
    return limit

