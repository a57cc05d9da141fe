"""Select the statevector gate kernels at import time.

The compiled extension is preferred.  Setting ``CURVEDCHAIN_PURE_PYTHON=1``
forces the numpy fallback; ``BACKEND`` names what was loaded.
"""

import os

from . import _kernels_py

if os.environ.get("CURVEDCHAIN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"

apply_1q = _impl.apply_1q
apply_diag = _impl.apply_diag
apply_x = _impl.apply_x
apply_cnot = _impl.apply_cnot


def available():
    """Map backend name -> kernel module for every importable implementation."""
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
