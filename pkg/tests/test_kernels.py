"""Both kernel lanes must agree exactly, and match independent oracles."""

import math

import numpy as np
import pytest
from scipy import ndimage

from berrymetrics import _kernels
from berrymetrics._kernels import _canonicalize, _pykernels
from conftest import random_mask

try:
    from berrymetrics._kernels import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(_ckernels is None,
                                    reason="compiled lane unavailable")


@needs_compiled
def test_lanes_identical_on_random_masks():
    rng = np.random.default_rng(42)
    for _ in range(20):
        mask = random_mask(rng, density=float(rng.uniform(0.2, 0.7)))
        lc, nc = _canonicalize(*_ckernels.label4(mask))
        lp, np_ = _canonicalize(*_pykernels.label4(mask))
        assert nc == np_
        assert (lc == lp).all()
        pc = _ckernels.region_perimeters(lc, nc)
        pp = _pykernels.region_perimeters(lp, np_)
        assert np.allclose(pc, pp, rtol=0, atol=0)


def test_component_count_matches_scipy():
    rng = np.random.default_rng(7)
    for _ in range(10):
        mask = random_mask(rng)
        _, n = _kernels.label4(mask)
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
        _, n_ref = ndimage.label(mask, structure=structure)
        assert n == n_ref


def test_labels_are_first_appearance_raster_order():
    mask = np.zeros((6, 10), dtype=bool)
    mask[0, 8] = True          # appears first in raster order
    mask[2, 1:3] = True
    mask[4, 5] = True
    labels, n = _kernels.label4(mask)
    assert n == 3
    assert labels[0, 8] == 1
    assert labels[2, 1] == 2
    assert labels[4, 5] == 3


def test_empty_and_full_masks():
    empty = np.zeros((5, 5), dtype=bool)
    labels, n = _kernels.label4(empty)
    assert n == 0 and not labels.any()
    full = np.ones((5, 5), dtype=bool)
    labels, n = _kernels.label4(full)
    assert n == 1 and (labels == 1).all()


def test_single_pixel_perimeter_is_zero():
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, 2] = True
    labels, n = _kernels.label4(mask)
    assert _kernels.region_perimeters(labels, n)[0] == 0.0


def test_square_perimeter():
    # k x k square: boundary walk is 4(k-1) straight unit steps.
    for k in (2, 3, 5, 8):
        mask = np.zeros((k + 4, k + 4), dtype=bool)
        mask[2:2 + k, 2:2 + k] = True
        labels, n = _kernels.label4(mask)
        per = _kernels.region_perimeters(labels, n)[0]
        assert per == pytest.approx(4 * (k - 1))


def test_disk_circularity_near_one():
    yy, xx = np.mgrid[0:41, 0:41]
    disk = (xx - 20) ** 2 + (yy - 20) ** 2 <= 15 ** 2
    labels, n = _kernels.label4(disk)
    area = disk.sum()
    per = _kernels.region_perimeters(labels, n)[0]
    circ = 4 * math.pi * area / per ** 2
    assert 0.85 <= circ <= 1.25   # digital disks overshoot slightly


def test_diagonal_line_not_connected():
    mask = np.eye(6, dtype=bool)
    _, n = _kernels.label4(mask)
    assert n == 6   # 4-connectivity: diagonals are separate components
