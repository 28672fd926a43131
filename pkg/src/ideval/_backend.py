"""Kernel selection.

The compiled extension is used when importable; otherwise the pure-Python
kernel takes over with identical semantics. Set IDEVAL_PURE_KERNELS=1 to
force the pure kernel (useful for debugging and for benchmarking the two
against each other).
"""

import os

if os.environ.get("IDEVAL_PURE_KERNELS"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl

impact_sums = _impl.impact_sums
full_sums = _impl.full_sums
BACKEND_NAME = _impl.BACKEND_NAME
