"""Numba switch.

Kernels are written once, in numpy-on-arrays style that numba can compile.
Set ``RBSMC_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy;
this is also the automatic fallback when numba is not importable.
"""
import os

_DISABLED = os.environ.get("RBSMC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None
    NUMBA_ENABLED = False


def kernel(func):
    """Compile ``func`` with numba when enabled; keep the Python original as ``func.py``."""
    if not NUMBA_ENABLED:
        func.py = func
        return func
    compiled = _njit(cache=True, nogil=True)(func)
    compiled.py = func
    return compiled
