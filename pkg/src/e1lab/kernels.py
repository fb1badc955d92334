"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting ``E1LAB_PURE_PYTHON=1``
forces the numpy fallback. ``BACKEND`` names the active one.
"""

import os

from . import _kernels_py

if os.environ.get("E1LAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "numpy" if _impl is _kernels_py else "cython"

rk4_w = _impl.rk4_w
lw_step = _impl.lw_step
upwind_step = _impl.upwind_step
level_diagnostics = _impl.level_diagnostics
