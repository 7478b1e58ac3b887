"""Back-end selection for the recursive simulation kernels.

The compiled extension is preferred. Set ``WDWHITTLE_PURE_PYTHON=1`` to force
the pure-Python implementation (used by the benchmark and parity tests).
"""
import os

from . import _kernels_py

if os.environ.get("WDWHITTLE_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

garch_filter = _impl.garch_filter
arch_filter = _impl.arch_filter
bilinear_filter = _impl.bilinear_filter

__all__ = ["BACKEND", "garch_filter", "arch_filter", "bilinear_filter"]
