"""Backend selection for the numeric kernels.

Set ``DEAGREY_DISABLE_NUMBA=1`` to force the pure-numpy path. Numba is also
skipped silently when it is not importable.
"""
import os

_FLAG = "DEAGREY_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _numba_requested()


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)
