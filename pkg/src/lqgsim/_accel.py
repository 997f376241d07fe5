"""Numba acceleration switch.

Hot kernels ship in two flavours: a numba ``@njit`` loop and a vectorized
numpy (or, for the inherently sequential stack builder, plain python)
fallback.  Which flavour runs is decided once at import time:

* numba importable and ``LQGSIM_NO_NUMBA`` unset -> numba kernels;
* otherwise -> fallback kernels.

``USING_NUMBA`` records the active path.  ``njit`` is always importable from
here; when numba is off it degrades to a no-op decorator so the kernel
module still imports (the decorated loops are then only used by tests that
exercise them explicitly).
"""

import os

__all__ = ["njit", "USING_NUMBA"]


def _numba_disabled() -> bool:
    return os.environ.get("LQGSIM_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


try:
    if _numba_disabled():
        raise ImportError("numba disabled via LQGSIM_NO_NUMBA")
    from numba import njit

    USING_NUMBA = True
except ImportError:

    def njit(*args, **kwargs):
        """Stand-in for numba.njit that leaves the function untouched."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap

    USING_NUMBA = False
