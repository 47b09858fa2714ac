"""Recurrence kernels, compiled when the extension is built.

``BACKEND`` is ``"cython"`` or ``"python"``. Setting ``FRACSPEC_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("FRACSPEC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _jacobi as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

jacobi_table = _impl.jacobi_table
legendre_table = _impl.legendre_table

__all__ = ["BACKEND", "jacobi_table", "legendre_table"]
