"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy fallback in ``_kernels_py``. Setting ``WIGNERQE_PURE_PYTHON=1`` forces
the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("WIGNERQE_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

BACKENDS = {"python": _kernels_py}
if BACKEND == "compiled":
    BACKENDS["compiled"] = kernels
else:
    try:
        from . import _kernels as _compiled
        BACKENDS["compiled"] = _compiled
    except ImportError:
        pass
