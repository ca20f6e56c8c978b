"""Backend selection for the hot kernels.

Numba is used when it imports cleanly and ``QSTYLEGAN_DISABLE_NUMBA`` is not
set to a truthy value. The pure-numpy path is always available and is what
``QSTYLEGAN_DISABLE_NUMBA=1`` forces.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("QSTYLEGAN_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    if _numba_requested():
        import numba as _numba
    else:
        _numba = None
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAS_NUMBA = _numba is not None
BACKEND = "numba" if HAS_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise an identity decorator."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
