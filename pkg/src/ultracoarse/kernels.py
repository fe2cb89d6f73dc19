"""Backend selection for the rank-matrix kernels.

The compiled module is used when it imports; setting
``ULTRACOARSE_PURE_PYTHON=1`` forces the pure-Python implementation.
"""
import os

from . import _pykernels

python = _pykernels
compiled = None

if not os.environ.get("ULTRACOARSE_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

backend = compiled if compiled is not None else python
BACKEND_NAME = "cython" if backend is compiled else "python"

ball_labels = backend.ball_labels
cov_table = backend.cov_table


def subset_oscillation(Rs, e, masks, Rt):
    if backend is compiled and len(Rs) <= 20 and len(Rt) <= 64:
        return compiled.subset_oscillation(Rs, e, masks, Rt)
    return python.subset_oscillation(Rs, e, masks, Rt)


def min_cover(R, x, e, d):
    if backend is compiled and len(R) <= 20:
        return compiled.min_cover(R, x, e, d)
    return python.min_cover(R, x, e, d)
