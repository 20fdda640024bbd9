"""Selects the compiled kernel extension when available, else the numpy mirror.

Set NP_UNIVERSAL_BACKEND=python or =compiled to force one side; unset picks
the compiled extension when it imported cleanly.
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("NP_UNIVERSAL_BACKEND", "").strip().lower()

if _choice in ("", "compiled", "c"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice:
            raise
        _impl = _kernels_py
elif _choice == "python":
    _impl = _kernels_py
else:
    raise RuntimeError(f"unrecognized NP_UNIVERSAL_BACKEND value: {_choice!r}")

BACKEND_NAME = _impl.BACKEND_NAME
lrt_statistics = _impl.lrt_statistics
glrt_statistics = _impl.glrt_statistics
interp_statistics = _impl.interp_statistics
gjs_statistics = _impl.gjs_statistics
seq_segment = _impl.seq_segment
