"""Backend selection for the numeric kernels.

The compiled extension is preferred when present; set NOREGRET_PURE_PYTHON=1
to force the numpy fallback (used by the backend-parity tests and the
benchmark). `BACKEND` reports which one is active.
"""

import os

if os.environ.get("NOREGRET_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

project_box = _impl.project_box
project_ball = _impl.project_ball
project_simplex = _impl.project_simplex
qp_box = _impl.qp_box
qp_pgd_simplex = _impl.qp_pgd_simplex
qp_pgd_ball = _impl.qp_pgd_ball
rank_one_update = _impl.rank_one_update
