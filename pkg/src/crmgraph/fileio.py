"""Shared text-sink helper: a path, "-" for stdout, or an open file."""

from __future__ import annotations

import sys
from contextlib import contextmanager


@contextmanager
def open_text_sink(target):
    """Yield a writable text file for a path, "-" (stdout), or file object."""
    if target == "-":
        yield sys.stdout
    elif hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh
