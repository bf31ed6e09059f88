"""Hot image kernels with a compiled core and a pure-NumPy fallback.

The compiled Cython extension is preferred when importable; setting
BERRYMETRICS_PURE=1 forces the pure lane. `BACKEND` reports the lane in use.
Label ids are canonicalized to first-appearance raster order so both lanes
return identical arrays.
"""

import os

import numpy as np

if os.environ.get("BERRYMETRICS_PURE", "0") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"


def _canonicalize(labels, n):
    if n == 0:
        return labels, 0
    flat = labels.ravel()
    vals, first = np.unique(flat, return_index=True)
    keep = vals > 0
    vals, first = vals[keep], first[keep]
    order = np.argsort(first)
    remap = np.zeros(n + 1, dtype=labels.dtype)
    remap[vals[order]] = np.arange(1, vals.size + 1, dtype=labels.dtype)
    return remap[labels], n


def label4(mask):
    """Label 4-connected components of a boolean mask.

    Returns (labels, n): int32 labels 1..n numbered by first raster-order
    appearance, 0 for background.
    """
    labels, n = _impl.label4(mask)
    return _canonicalize(labels, n)


def region_perimeters(labels, n):
    """Outer-boundary length (px) of each label 1..n.

    Moore-neighbour boundary tracing; straight steps count 1, diagonal
    steps sqrt(2). Single-pixel regions get 0.
    """
    return _impl.region_perimeters(labels, n)
