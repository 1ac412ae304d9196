"""JIT selection.

Kernels are written so that they run unchanged as plain numpy code or under
``numba.njit``.  Set ``QUADNORM_DISABLE_JIT=1`` before import to force the
pure-numpy path (useful for debugging and for the benchmark baseline).
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

DISABLED = os.environ.get("QUADNORM_DISABLE_JIT", "").strip().lower() not in ("", "0", "false", "no")
JIT_ENABLED = numba is not None and not DISABLED


def njit(fn):
    if not JIT_ENABLED:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
