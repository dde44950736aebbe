"""Hot numerical kernels.

The compiled extension is used when it imports; otherwise the numpy versions
take over.  Set ``FMMD_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"

if os.environ.get("FMMD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import (  # noqa: F401
            permuted_u_statistics,
            u_statistic,
            weighted_sq_dists,
        )

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._fallback import (  # noqa: F401
        permuted_u_statistics,
        u_statistic,
        weighted_sq_dists,
    )

__all__ = ["BACKEND", "permuted_u_statistics", "u_statistic", "weighted_sq_dists"]
