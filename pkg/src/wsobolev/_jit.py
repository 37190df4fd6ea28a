"""Numba toggle.

Set ``WSOBOLEV_DISABLE_JIT=1`` to force the pure-numpy kernels.
"""
import functools
import os

_FLAG = os.environ.get("WSOBOLEV_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and _FLAG not in ("1", "true", "yes", "on")

if numba is not None:
    njit = functools.partial(numba.njit, cache=True, nogil=True)
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
