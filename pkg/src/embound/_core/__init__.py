"""Hot numerical kernels.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy ``_fallback`` module provides the same functions. Setting
``EMBOUND_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("EMBOUND_PURE_PYTHON"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

try:
    from . import _kernels as compiled
except ImportError:
    compiled = None

__all__ = ["BACKEND", "compiled", "fallback", "kernels"]
