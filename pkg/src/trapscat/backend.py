"""Kernel backend selection: compiled extension if importable, numpy otherwise.

Set TRAPSCAT_PURE_PYTHON=1 to force the numpy path (used by the benchmark and
the backend-parity tests).
"""
import os

from . import _kernels_np

if os.environ.get("TRAPSCAT_PURE_PYTHON"):
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # compiled extension, optional
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"

cis_mul = _impl.cis_mul
gauss2d_accum = _impl.gauss2d_accum
