"""Backend selection for the exact-value scoring kernel.

The compiled extension is used when it imports; setting ``XORREP_PURE=1``
forces the numpy implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "cython" if _compiled is not None and not os.environ.get("XORREP_PURE") else "python"


def available() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def best_pair(f_lo, f_hi, K, nfx, ngy, nhz, sx, sy, sz, st, sw, sub, backend=None):
    backend = backend or BACKEND
    sw = np.asarray(sw)
    if backend == "cython" and sw.dtype != object:
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        as64 = lambda a: np.ascontiguousarray(a, dtype=np.int64)
        return _compiled.best_pair(f_lo, f_hi, K, nfx, ngy, nhz, as64(sx), as64(sy), as64(sz), as64(st), as64(sw), as64(sub))
    return _kernels_py.best_pair(f_lo, f_hi, K, nfx, ngy, nhz, sx, sy, sz, st, sw, sub)
