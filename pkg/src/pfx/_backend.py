"""Pick the compiled kernels when available, else the numpy fallback.

Set ``PFX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

NATIVE_AVAILABLE = False
_native = None
try:
    from . import _native  # noqa: F811

    NATIVE_AVAILABLE = True
except ImportError:  # extension not built
    pass

if NATIVE_AVAILABLE and os.environ.get("PFX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    kernels = _native
    BACKEND = "native"
else:
    kernels = _fallback
    BACKEND = "python"

convolve_separable = kernels.convolve_separable
warp_bilinear = kernels.warp_bilinear
lbp_codes = kernels.lbp_codes
smo_solve = kernels.smo_solve
