"""Small shared helpers: worker counts and number formatting."""

import os


def worker_count(default=None):
    """Worker cap for data-parallel stages.

    ``RICCI_LAB_THREADS`` overrides; otherwise min(4, cpu_count).  Results
    never depend on the value (chunks are reduced in a fixed order).
    """
    env = os.environ.get("RICCI_LAB_THREADS")
    if env:
        return max(1, int(env))
    if default is not None:
        return default
    return max(1, min(4, os.cpu_count() or 1))


def fmt_float(x, pretty=False):
    """Shortest-round-trip formatting in machine mode, 6 significant digits
    in pretty mode."""
    if x is None:
        return ""
    if pretty:
        return f"{x:.6g}"
    return repr(float(x))
