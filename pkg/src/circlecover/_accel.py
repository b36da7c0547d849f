"""Kernel backend selection: numba-compiled loops vs pure numpy/Python.

Heavy inner loops in this package exist twice — an ``@njit`` version and a
plain numpy/Python version with identical integer semantics.  Which one runs
is decided once, at import time:

* if the environment variable ``CIRCLECOVER_NO_NUMBA`` is set to a non-empty
  value, the pure path is used;
* otherwise numba is used when it imports cleanly, and the pure path is the
  silent fallback when it does not.

Both paths are exact integer computations fed by the same pre-drawn random
arrays, so results are bit-identical either way; the tests assert this on
small instances and ``benchmarks/bench_kernels.py`` times the difference.
"""

from __future__ import annotations

import os

_FORCED_OFF = bool(os.environ.get("CIRCLECOVER_NO_NUMBA", ""))

try:  # pragma: no cover - exercised implicitly by which path runs
    if _FORCED_OFF:
        raise ImportError("numba disabled by CIRCLECOVER_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""

        def wrap(func):
            return func

        if args and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
