"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
NumPy fallback is used. Setting ``OSCBATH_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py as python_impl

try:
    from . import _kernels as compiled_impl
except ImportError:  # pragma: no cover - depends on the build
    compiled_impl = None

if compiled_impl is not None and not os.environ.get("OSCBATH_PURE_PYTHON"):
    _impl = compiled_impl
    BACKEND = "cython"
else:
    _impl = python_impl
    BACKEND = "python"

leapfrog = _impl.leapfrog
power_iteration = _impl.power_iteration

__all__ = ["BACKEND", "compiled_impl", "python_impl", "leapfrog", "power_iteration"]
