"""Backend selection for the interference kernels.

The compiled extension is used when importable; set ``HAPNET_PURE_PYTHON=1``
to force the NumPy fallback.  ``BACKEND`` names the active choice.
"""

import os

from . import _kernels_py

if os.environ.get("HAPNET_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"
hap_sums = _impl.hap_sums
bs_sums = _impl.bs_sums
