"""Optional numba acceleration.

Hot kernels are written in the numba-compatible subset of Python and wrapped
with :func:`maybe_njit`. Setting ``QPATHSIM_NO_NUMBA=1`` (or running without
numba installed) leaves them as plain Python/numpy functions.
"""

import os

_DISABLED = os.environ.get("QPATHSIM_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def maybe_njit(func):
    """Compile ``func`` with numba when enabled; keep the original at ``py_func``."""
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return _njit(cache=True, nogil=True)(func)
