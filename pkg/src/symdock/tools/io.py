"""Atomic file output.

Output files are first written to a temporary sibling and then moved into
place, so readers never observe partial content and failed runs leave no
truncated files behind.
"""

import contextlib
import os
import tempfile


@contextlib.contextmanager
def atomic_open(path, mode="w", encoding="utf-8", newline=None):
    """Open a temporary file that replaces ``path`` on successful exit."""
    directory = os.path.dirname(os.path.abspath(path))
    descriptor, temporary = tempfile.mkstemp(
        dir=directory, prefix=f".{os.path.basename(path)}.", suffix=".tmp"
    )
    try:
        if "b" in mode:
            handle = os.fdopen(descriptor, mode)
        else:
            handle = os.fdopen(
                descriptor, mode, encoding=encoding, newline=newline
            )
        with handle:
            yield handle
        os.replace(temporary, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.remove(temporary)
        raise


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` atomically."""
    with atomic_open(path, "w") as handle:
        handle.write(text)
