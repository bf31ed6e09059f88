"""Major axis, symmetry score, and calibrated area."""

import numpy as np

from ..errors import DegenerateAxis, EmptySides
from .color import rgb_to_hsv
from .types import MajorAxis

_EIGEN_GAP = 0.01        # relative eigenvalue gap below which axis is undefined
_GREEN_LO, _GREEN_HI = 60.0, 180.0


def _mask_coords(mask):
    ys, xs = np.nonzero(mask.bits)
    return xs.astype(np.float64), ys.astype(np.float64)


def _walk_to_boundary(mask, x0, y0, dx, dy):
    """Last in-mask point stepping from (x0, y0) along (dx, dy) in 0.5 px."""
    bits = mask.bits
    h, w = bits.shape
    t, last = 0.0, (x0, y0)
    while True:
        t += 0.5
        x, y = x0 + t * dx, y0 + t * dy
        c, r = int(round(x)), int(round(y))
        if not (0 <= r < h and 0 <= c < w) or not bits[r, c]:
            return last
        last = (x, y)


def _green_fraction(image, point, radius, sat_floor):
    """Fraction of green-hued pixels in a disk around an image point."""
    px = image.pixels
    h_img, w_img = px.shape[:2]
    x0, y0 = point
    r0 = max(0, int(y0) - radius)
    r1 = min(h_img, int(y0) + radius + 1)
    c0 = max(0, int(x0) - radius)
    c1 = min(w_img, int(x0) + radius + 1)
    yy, xx = np.mgrid[r0:r1, c0:c1]
    disk = (xx - x0) ** 2 + (yy - y0) ** 2 <= radius ** 2
    if not disk.any():
        return 0.0
    hue, sat, _ = rgb_to_hsv(px[r0:r1, c0:c1])
    green = (sat >= sat_floor) & (hue >= _GREEN_LO) & (hue < _GREEN_HI)
    return float(green[disk].mean())


def compute_axis(image, mask, cfg):
    """Principal axis of the mask, stem end chosen by green-hue probing.

    Raises DegenerateAxis when the two principal eigenvalues are within 1%
    of each other (near-circular silhouette); callers fall back to
    vertical_axis().
    """
    xs, ys = _mask_coords(mask)
    cx, cy = xs.mean(), ys.mean()
    cov = np.cov(np.vstack([xs - cx, ys - cy]))
    evals, evecs = np.linalg.eigh(cov)
    lam2, lam1 = float(evals[0]), float(evals[1])
    if lam1 <= 0 or (lam1 - lam2) / lam1 < _EIGEN_GAP:
        raise DegenerateAxis(
            f"principal eigenvalues {lam1:.4g}, {lam2:.4g} differ by < 1%")
    dx, dy = float(evecs[0, 1]), float(evecs[1, 1])
    p_a = _walk_to_boundary(mask, cx, cy, dx, dy)
    p_b = _walk_to_boundary(mask, cx, cy, -dx, -dy)

    f_a = _green_fraction(image, p_a, cfg.stem_probe_radius, cfg.saturation_floor)
    f_b = _green_fraction(image, p_b, cfg.stem_probe_radius, cfg.saturation_floor)
    if abs(f_a - f_b) >= cfg.stem_hue_margin:
        stem, bottom = (p_a, p_b) if f_a > f_b else (p_b, p_a)
    else:
        # Hue uninformative: berries are imaged calyx-up, stem is the upper end.
        stem, bottom = (p_a, p_b) if p_a[1] <= p_b[1] else (p_b, p_a)
    return MajorAxis(stem_point=stem, bottom_point=bottom)


def vertical_axis(mask):
    """Vertical axis through the centroid; fallback for DegenerateAxis."""
    xs, ys = _mask_coords(mask)
    cx, cy = xs.mean(), ys.mean()
    top = _walk_to_boundary(mask, cx, cy, 0.0, -1.0)
    bottom = _walk_to_boundary(mask, cx, cy, 0.0, 1.0)
    return MajorAxis(stem_point=top, bottom_point=bottom)


def symmetry(mask, axis):
    """Percent difference of pixel counts on the two sides of the axis.

    |L - R| / ((L + R) / 2) * 100 with on-axis pixels excluded; 0 for a
    mask exactly mirror-symmetric about the axis, at most 200.
    """
    xs, ys = _mask_coords(mask)
    sx, sy = axis.stem_point
    dx, dy = axis.direction
    cross = dx * (ys - sy) - dy * (xs - sx)
    left = int((cross > 0).sum())
    right = int((cross < 0).sum())
    if left + right == 0:
        raise EmptySides("all mask pixels lie on the axis")
    return abs(left - right) / ((left + right) / 2.0) * 100.0


def area_in2(mask, resolution):
    """Mask area in square inches at a linear pixels-per-inch calibration."""
    if not resolution > 0:
        raise ValueError("resolution must be > 0")
    return mask.pixel_count / float(resolution) ** 2
