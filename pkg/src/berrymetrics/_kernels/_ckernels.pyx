# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled image kernels: 4-connected labelling and boundary tracing.

Mirrors `_pykernels.py`; both lanes must produce identical output.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef int[8] MOORE_DR = [0, -1, -1, -1, 0, 1, 1, 1]
cdef int[8] MOORE_DC = [-1, -1, 0, 1, 1, 1, 0, -1]


cdef inline int _find(int[:] parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef inline void _union(int[:] parent, int a, int b) nogil:
    cdef int ra = _find(parent, a)
    cdef int rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


def label4(mask):
    """Two-pass union-find 4-connected labelling of a boolean mask."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(
        np.asarray(mask, dtype=bool).view(np.uint8))
    cdef Py_ssize_t rows = m.shape[0]
    cdef Py_ssize_t cols = m.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] lab = np.zeros((rows, cols),
                                                         dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent_arr = np.zeros(
        rows * cols // 2 + 2, dtype=np.int32)
    cdef int[:] parent = parent_arr
    cdef Py_ssize_t r, c
    cdef int nxt = 1, left, up

    for r in range(rows):
        for c in range(cols):
            if not m[r, c]:
                continue
            left = lab[r, c - 1] if c > 0 else 0
            up = lab[r - 1, c] if r > 0 else 0
            if left and up:
                lab[r, c] = left if left < up else up
                _union(parent, left, up)
            elif left:
                lab[r, c] = left
            elif up:
                lab[r, c] = up
            else:
                lab[r, c] = nxt
                parent[nxt] = nxt
                nxt += 1

    # Resolve equivalences; renumber roots densely.
    cdef cnp.ndarray[cnp.int32_t, ndim=1] remap = np.zeros(nxt, dtype=np.int32)
    cdef int i, n = 0, root
    for i in range(1, nxt):
        root = _find(parent, i)
        if root == i:
            n += 1
            remap[i] = n
    for r in range(rows):
        for c in range(cols):
            if lab[r, c]:
                lab[r, c] = remap[_find(parent, lab[r, c])]
    return lab, n


def region_perimeters(labels, int n):
    """Outer-boundary length of each label 1..n (Moore-neighbour tracing)."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] lab = np.ascontiguousarray(
        np.asarray(labels, dtype=np.int32))
    cdef Py_ssize_t rows = lab.shape[0]
    cdef Py_ssize_t cols = lab.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] start_r = np.full(n + 1, -1,
                                                            dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] start_c = np.full(n + 1, -1,
                                                            dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] area = np.zeros(n + 1,
                                                          dtype=np.int64)
    cdef Py_ssize_t r, c
    cdef int lb

    for r in range(rows):
        for c in range(cols):
            lb = lab[r, c]
            if lb:
                if start_r[lb] < 0:
                    start_r[lb] = r
                    start_c[lb] = c
                area[lb] += 1

    cdef double SQRT2 = sqrt(2.0)
    cdef double perim
    cdef Py_ssize_t cr, cc, br, bc, nr, nc, pr, pc
    cdef Py_ssize_t s0r, s0c, s1r, s1c
    cdef int k0, i, k, found, first
    cdef long step, max_steps
    for lb in range(1, n + 1):
        if area[lb] <= 1:
            continue
        cr = start_r[lb]
        cc = start_c[lb]
        br = cr
        bc = cc - 1
        perim = 0.0
        first = 1
        s0r = s0c = s1r = s1c = -1
        max_steps = 4 * area[lb] + 8
        for step in range(max_steps):
            for k0 in range(8):
                if MOORE_DR[k0] == br - cr and MOORE_DC[k0] == bc - cc:
                    break
            found = 0
            for i in range(1, 9):
                k = (k0 + i) % 8
                nr = cr + MOORE_DR[k]
                nc = cc + MOORE_DC[k]
                if 0 <= nr < rows and 0 <= nc < cols and lab[nr, nc] == lb:
                    pr = cr + MOORE_DR[(k0 + i - 1) % 8]
                    pc = cc + MOORE_DC[(k0 + i - 1) % 8]
                    found = 1
                    break
            if not found:
                perim = 0.0
                break
            if first:
                s0r, s0c, s1r, s1c = cr, cc, nr, nc
                first = 0
            elif cr == s0r and cc == s0c and nr == s1r and nc == s1c:
                break
            if (nr - cr if nr > cr else cr - nr) + \
                    (nc - cc if nc > cc else cc - nc) == 2:
                perim += SQRT2
            else:
                perim += 1.0
            br = pr
            bc = pc
            cr = nr
            cc = nc
        out[lb - 1] = perim
    return out
