"""Selects the compiled or pure-numpy kernel backend at import time.

The compiled extension is preferred when present; set MODOMA_PURE_PYTHON=1
to force the fallback.  Both backends expose the same two callables with
identical semantics; seeds are not exchangeable across backends because the
samplers consume random numbers differently.
"""

from __future__ import annotations

import os

if os.environ.get("MODOMA_PURE_PYTHON", "") == "1":
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

complete_link = _impl.complete_link
mc_extreme_count = _impl.mc_extreme_count


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'pure'."""
    return BACKEND
