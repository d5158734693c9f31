"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set VIDFACTORY_PURE=1 to force the pure backend (used by the benchmark and
the backend-equality tests). Numerics are identical either way.
"""

from __future__ import annotations

import os

from . import kernels_py

BACKEND = "pure"
im2col2d = kernels_py.im2col2d
col2im2d = kernels_py.col2im2d

if os.environ.get("VIDFACTORY_PURE", "0") != "1":
    try:
        from . import _kernels  # type: ignore[attr-defined]

        im2col2d = _kernels.im2col2d
        col2im2d = _kernels.col2im2d
        BACKEND = "compiled"
    except ImportError:
        pass


def backend_name() -> str:
    return BACKEND
