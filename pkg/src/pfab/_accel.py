"""Optional numba acceleration.

Hot kernels are decorated with :func:`njit`.  When numba is missing, or the
environment variable ``PFAB_DISABLE_NUMBA`` is set to a truthy value, the
decorator is the identity and the very same source runs as plain
Python/numpy.  The flag is read once, at import time.
"""
from __future__ import annotations

import os

__all__ = ["NUMBA_ENABLED", "njit"]


def _flag_disabled() -> bool:
    return os.environ.get("PFAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _flag_disabled():
        raise ImportError("disabled by PFAB_DISABLE_NUMBA")
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` or a no-op, usable bare or with arguments."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    if len(args) == 1 and callable(args[0]):
        return _numba.njit(**kwargs)(args[0])
    return _numba.njit(*args, **kwargs)
