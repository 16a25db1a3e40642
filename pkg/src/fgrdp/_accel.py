"""Backend selection for the numeric kernels.

Set ``FGRDP_NUMBA=0`` in the environment before import to force the pure-numpy
path. Both paths consume the same pre-drawn random numbers, so results are
bit-identical across backends.
"""

from __future__ import annotations

import os

_flag = os.environ.get("FGRDP_NUMBA", "1").strip().lower()

try:
    if _flag in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by FGRDP_NUMBA")
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:
    _numba = None
    HAVE_NUMBA = False


def njit(fn):
    if HAVE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
