"""Numba switch.

Set ``XYLOC_NO_NUMBA=1`` to force the pure-numpy kernels; this is also the
path taken when numba cannot be imported.
"""

import os

_DISABLED = os.environ.get("XYLOC_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by XYLOC_NO_NUMBA")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
