"""Numba switch.

Set ``GAUSSTRI_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels. Numba is also skipped silently when it cannot be imported.
"""
import os

_FLAG = os.environ.get("GAUSSTRI_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV
NUMBA_AVAILABLE = numba is not None


def njit(f=None, **options):
    """``numba.njit`` when numba is importable, identity otherwise.

    Compilation is attempted even when the env flag is set so that the
    benchmark can still time both paths; the flag only controls dispatch.
    """
    options.setdefault("cache", True)
    options.setdefault("nogil", True)

    def wrap(func):
        if numba is None:
            return func
        return numba.njit(**options)(func)

    return wrap if f is None else wrap(f)


def backend():
    return "numba" if USE_NUMBA else "numpy"
