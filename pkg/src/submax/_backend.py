"""Numba/NumPy backend selection for the hot kernels.

All performance-critical loops live in ``submax._kernels`` and are written as
plain functions over NumPy arrays. By default they are compiled with
``numba.njit``; setting the environment variable ``SUBMAX_DISABLE_NUMBA`` to
``1``/``true``/``yes`` (or running without numba installed) keeps them as
interpreted NumPy code. Both paths execute the same source, so results agree;
the flag is read once at import time.

``benchmarks/bench_backends.py`` compares the two paths head to head.
"""

import functools
import os

import numpy as np

_TRUTHY = ("1", "true", "yes", "on")


def _numba_disabled():
    return os.environ.get("SUBMAX_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


NUMBA_ENABLED = False

if not _numba_disabled():
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def jit(func=None, **kwargs):
    """Apply ``numba.njit`` when enabled, otherwise return ``func`` interpreted.

    Usable bare (``@jit``) or with options (``@jit(cache=True)``). The
    interpreted path runs under ``np.errstate(over="ignore")`` because the
    in-kernel counter RNG relies on modular uint64 arithmetic, which compiled
    code wraps silently but NumPy scalars flag as overflow.
    """
    if func is None:
        def wrap(f):
            return jit(f, **kwargs)

        return wrap
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        return _numba_njit(**kwargs)(func)

    @functools.wraps(func)
    def interpreted(*args, **kw):
        with np.errstate(over="ignore"):
            return func(*args, **kw)

    return interpreted


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
