"""Numba switch.

Kernels are compiled with numba when it is importable, unless the
environment variable ``COVTEST_DISABLE_NUMBA`` is set to a truthy value, in
which case the pure numpy implementations are dispatched instead.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_FLAG = "COVTEST_DISABLE_NUMBA"

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in {
    "1",
    "true",
    "yes",
    "on",
}


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise a no-op decorator.

    The compiled function is always created (if numba exists) so that the
    numba and numpy paths can be compared side by side in tests and
    benchmarks regardless of the dispatch flag.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend():
    return "numba" if USE_NUMBA else "numpy"
