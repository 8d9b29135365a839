"""Optional numba acceleration with a pure-Python fallback.

Set ROCKPERM_NUMBA=0 to force the fallback path (e.g. for debugging or on
machines without numba).  The decision is made once at import time.
"""

import os


def _numba_enabled() -> bool:
    flag = os.environ.get("ROCKPERM_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()


def maybe_njit(func):
    """Apply numba.njit(cache=True) when acceleration is enabled."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
