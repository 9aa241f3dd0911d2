"""Optional numba acceleration.

Set ``ADTLEARN_DISABLE_NUMBA=1`` to force the pure numpy code paths.
"""

import os

_disabled = os.environ.get("ADTLEARN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("numba disabled by ADTLEARN_DISABLE_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn
        return wrap
