"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
reference implementation is used. ``SIL_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _kernels_py
from ._kernels_py import step_propagators

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("SIL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py


def rk4_fundamental(A, h, start):
    """RK4 fundamental solution from generator samples (see ``_kernels_py``)."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    start = np.ascontiguousarray(start, dtype=np.float64)
    return _impl.rk4_fundamental(A, float(h), start)


def chain_products(P, start):
    P = np.ascontiguousarray(P, dtype=np.float64)
    start = np.ascontiguousarray(start, dtype=np.float64)
    return _impl.chain_products(P, start)


__all__ = ["BACKEND", "rk4_fundamental", "chain_products", "step_propagators"]
