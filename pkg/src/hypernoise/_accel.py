"""JIT selection.

Set ``HYPERNOISE_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT``) to
run every kernel through its pure-numpy implementation instead.
"""
import os

_FLAG = os.environ.get("HYPERNOISE_DISABLE_NUMBA", "").strip().lower()

try:
    if _FLAG in ("1", "true", "yes", "on") or "NUMBA_DISABLE_JIT" in os.environ:
        raise ImportError
    import numba

    HAVE_NUMBA = True
    njit = numba.njit(cache=True, nogil=True)
except ImportError:
    numba = None
    HAVE_NUMBA = False

    def njit(fn):
        return fn


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
