"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the VC_BACKEND environment
variable: "numba", "numpy", or unset/"auto" (numba when importable). Each
backend is deterministic run to run; across backends results agree to
floating-point rounding but are not guaranteed bit-identical, because BLAS
and the scalar loops reduce in different orders.

``benchmarks/bench_backends.py`` times the two side by side.
"""

import os

from . import numpy_backend

_choice = os.environ.get("VC_BACKEND", "auto").strip().lower() or "auto"
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError("VC_BACKEND must be 'numba' or 'numpy', got %r" % _choice)

BACKEND = "numpy"
_impl = numpy_backend
if _choice in ("auto", "numba"):
    try:
        from . import numba_backend as _numba_impl

        _impl = _numba_impl
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise

correlate_valid = _impl.correlate_valid
conv1d_fwd = _impl.conv1d_fwd
conv1d_bwd_x = _impl.conv1d_bwd_x
conv1d_bwd_w = _impl.conv1d_bwd_w
conv2d_fwd = _impl.conv2d_fwd
conv2d_bwd_x = _impl.conv2d_bwd_x
conv2d_bwd_w = _impl.conv2d_bwd_w

__all__ = [
    "BACKEND",
    "correlate_valid",
    "conv1d_fwd",
    "conv1d_bwd_x",
    "conv1d_bwd_w",
    "conv2d_fwd",
    "conv2d_bwd_x",
    "conv2d_bwd_w",
]
