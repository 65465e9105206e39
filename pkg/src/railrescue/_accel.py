"""Optional numba acceleration.

Set ``RAILRESCUE_DISABLE_NUMBA=1`` to run every kernel on its pure
Python/numpy fallback. The flag is read once, at import time.
"""
import os

_flag = os.environ.get("RAILRESCUE_DISABLE_NUMBA", "").strip().lower()

try:
    if _flag not in ("", "0", "false", "no"):
        raise ImportError
    import numba
except ImportError:
    numba = None

USE_NUMBA = numba is not None


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
