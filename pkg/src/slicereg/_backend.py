"""Select between numba-compiled kernels and the pure numpy fallback.

Set ``SLICEREG_NUMBA=0`` in the environment before import to force the numpy
path. Numba is also skipped silently when it cannot be imported.
"""
import os

_flag = os.environ.get("SLICEREG_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    USE_NUMBA = False


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(compiled, fallback):
    return compiled if USE_NUMBA else fallback


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
