"""Pure-Python/NumPy implementations of the hot image kernels.

Reference lane for the compiled extension: `_ckernels.pyx` mirrors these
algorithms step for step, so both lanes produce identical output.
"""

import math

import numpy as np
from scipy import ndimage

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# Moore neighbourhood, clockwise starting at west.
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_SQRT2 = math.sqrt(2.0)


def label4(mask):
    """4-connected component labelling.

    Returns (labels, n) where labels is int32 with arbitrary positive label
    ids; the shared wrapper canonicalizes ids by first raster appearance.
    """
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=_CROSS)
    return labels.astype(np.int32, copy=False), int(n)


def _trace_perimeter(region):
    """Boundary length of a single connected region (bool 2D array).

    Moore-neighbour tracing of the outer boundary; straight steps count 1,
    diagonal steps sqrt(2). Single-pixel regions have length 0.
    """
    rows, cols = region.shape
    flat = np.flatnonzero(region)
    if flat.size == 1:
        return 0.0
    r0, c0 = divmod(int(flat[0]), cols)

    def fg(r, c):
        return 0 <= r < rows and 0 <= c < cols and region[r, c]

    # Backtrack starts at the west neighbour, which is background for the
    # first pixel in raster order.
    perim = 0.0
    cur = (r0, c0)
    back = (r0, c0 - 1)
    start = None
    max_steps = 4 * flat.size + 8
    for _ in range(max_steps):
        dr, dc = back[0] - cur[0], back[1] - cur[1]
        k0 = _MOORE.index((dr, dc))
        nxt = None
        for i in range(1, 9):
            dr, dc = _MOORE[(k0 + i) % 8]
            r, c = cur[0] + dr, cur[1] + dc
            if fg(r, c):
                nxt = (r, c)
                back = (cur[0] + _MOORE[(k0 + i - 1) % 8][0],
                        cur[1] + _MOORE[(k0 + i - 1) % 8][1])
                break
        if nxt is None:
            return 0.0
        if start is None:
            start = (cur, nxt)
        elif (cur, nxt) == start:
            break
        perim += _SQRT2 if abs(nxt[0] - cur[0]) + abs(nxt[1] - cur[1]) == 2 else 1.0
        cur = nxt
    return perim


def region_perimeters(labels, n):
    """Outer-boundary length of each label 1..n in a labelled image."""
    labels = np.asarray(labels)
    out = np.zeros(n, dtype=np.float64)
    slices = ndimage.find_objects(labels, max_label=n)
    for i, sl in enumerate(slices):
        if sl is None:
            continue
        out[i] = _trace_perimeter(labels[sl] == i + 1)
    return out
