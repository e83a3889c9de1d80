"""Right-hand-side kernels: compiled when available, numpy otherwise.

Set ``COLLAPSE_NS_PURE=1`` to force the numpy implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "numpy"
thin_rhs = _kernels_py.thin_rhs
limit_rhs = _kernels_py.limit_rhs

if os.environ.get("COLLAPSE_NS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "compiled"
        thin_rhs = _compiled.thin_rhs
        limit_rhs = _compiled.limit_rhs
