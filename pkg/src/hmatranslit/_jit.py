"""Optional numba acceleration.

Set ``HMATRANSLIT_DISABLE_NUMBA=1`` to run every kernel as plain numpy code.
Each decorated kernel keeps its undecorated version on ``.py_func`` either way,
so both paths can be compared in one process.
"""

import os

_FLAG = "HMATRANSLIT_DISABLE_NUMBA"

try:
    if os.environ.get(_FLAG, "").strip() not in ("", "0"):
        raise ImportError(f"{_FLAG} is set")
    import numba
except ImportError:
    numba = None

USE_NUMBA = numba is not None


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched."""
    if numba is None:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)
