"""Backend selection for the RK4 kernels.

The compiled extension is used when importable; otherwise, or when the
environment variable ``SLOPT_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python twins are used.  ``BACKEND`` names the choice.
"""

import os

from . import _pykernels

if os.environ.get("SLOPT_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

rk4_linear = _impl.rk4_linear
rk4_critical = _impl.rk4_critical
rk4_pendulum = _impl.rk4_pendulum

__all__ = ["BACKEND", "rk4_linear", "rk4_critical", "rk4_pendulum"]
