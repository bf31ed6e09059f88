"""Achene (seed) detection and point-pattern statistics."""

import math

import numpy as np
from scipy.spatial import cKDTree

from .. import _kernels
from .color import luminance
from .types import AcheneDetection, AcheneMetrics


def otsu_threshold(values):
    """Otsu threshold over uint8 values; dark class is `value <= t`."""
    hist = np.bincount(np.asarray(values, dtype=np.uint8).ravel(),
                       minlength=256).astype(np.float64)
    if hist.sum() == 0:
        raise ValueError("empty histogram")
    t = _otsu_on_hist(hist)
    return 0 if t is None else t


def _otsu_on_hist(hist):
    """Otsu argmax over a 256-bin histogram, or None if no valid split."""
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = total - w0
    sum0 = np.cumsum(hist * levels)
    mu_total = sum0[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = sum0 / w0
        mu1 = (mu_total - sum0) / w1
        between = w0 * w1 * (mu0 - mu1) ** 2
    between[~np.isfinite(between)] = -1.0
    if between.max() <= 0.0:
        return None
    return int(between.argmax())


def dark_minority_threshold(values, cfg):
    """Otsu threshold for a small dark population, or None if absent.

    Achenes are a dark minority of the berry interior, so a raw Otsu split
    of a near-unimodal histogram (few or no achenes) lands inside the body.
    Guard: accept a threshold only when the dark class is at most
    cfg.achene_max_dark_fraction of the pixels and the light-dark class
    mean gap is at least cfg.achene_min_contrast; otherwise re-run Otsu on
    the dark sub-histogram until a split qualifies or none remains.
    """
    full = np.bincount(np.asarray(values, dtype=np.uint8).ravel(),
                       minlength=256).astype(np.float64)
    total = full.sum()
    if total == 0:
        raise ValueError("empty histogram")
    levels = np.arange(256, dtype=np.float64)
    hist = full
    hi = 256
    while True:
        t = _otsu_on_hist(hist)
        if t is None or t >= hi:
            return None
        n_dark = full[:t + 1].sum()
        if n_dark in (0.0, total):
            return None
        mean_dark = (full[:t + 1] * levels[:t + 1]).sum() / n_dark
        mean_light = (full[t + 1:] * levels[t + 1:]).sum() / (total - n_dark)
        if (n_dark / total <= cfg.achene_max_dark_fraction
                and mean_light - mean_dark >= cfg.achene_min_contrast):
            return t
        hist = np.zeros(256)
        hist[:t + 1] = full[:t + 1]
        hi = t


def detect_achenes(image, mask, cfg):
    """Dark blobs inside the mask that match achene size and shape.

    Thresholds the luminance channel on the mask-interior histogram
    (guarded Otsu via dark_minority_threshold unless cfg.achene_threshold
    is set; no qualifying dark class means no detections), labels the
    dark 4-connected
    components, and keeps those whose equivalent diameter lies in
    [achene_d_min, achene_d_max] with circularity >= the configured floor.
    Detections come back sorted by centroid, row-major.
    """
    lum = luminance(image.pixels)
    if cfg.achene_threshold is not None:
        thr = int(cfg.achene_threshold)
    else:
        thr = dark_minority_threshold(lum[mask.bits], cfg)
        if thr is None:       # no dark minority: no achenes visible
            return []
    dark = mask.bits & (lum <= thr)
    labels, n = _kernels.label4(dark)
    if n == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=n + 1)[1:].astype(np.float64)
    perims = _kernels.region_perimeters(labels, n)
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    cx = np.bincount(ids, weights=xs, minlength=n + 1)[1:] / areas
    cy = np.bincount(ids, weights=ys, minlength=n + 1)[1:] / areas

    out = []
    for i in range(n):
        eq_d = 2.0 * math.sqrt(areas[i] / math.pi)
        if not cfg.achene_d_min <= eq_d <= cfg.achene_d_max:
            continue
        if perims[i] > 0:
            circ = min(4.0 * math.pi * areas[i] / perims[i] ** 2, 1.0)
        else:
            circ = 1.0  # point-like blob
        if circ < cfg.achene_circularity_min:
            continue
        out.append(AcheneDetection(centroid=(float(cx[i]), float(cy[i])),
                                   area_px=float(areas[i]),
                                   circularity=circ,
                                   equiv_diameter_px=eq_d))
    out.sort(key=lambda d: (d.centroid[1], d.centroid[0]))
    return out


def nearest_neighbor_distances(centroids):
    """Distance from each point to its single nearest other point."""
    pts = np.asarray(centroids, dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=2)
    return dist[:, 1]


def achene_metrics(detections):
    """Summary stats over detections; distance fields need count >= 2."""
    count = len(detections)
    if count == 0:
        return AcheneMetrics(count=0)
    sizes = np.array([d.equiv_diameter_px for d in detections])
    size_mean = float(sizes.mean())
    size_std = float(sizes.std(ddof=1)) if count >= 2 else None
    if count < 2:
        return AcheneMetrics(count=count, size_mean_px=size_mean,
                             size_std_px=size_std)
    nn = nearest_neighbor_distances([d.centroid for d in detections])
    return AcheneMetrics(count=count,
                         size_mean_px=size_mean,
                         size_std_px=size_std,
                         nn_dist_mean_px=float(nn.mean()),
                         nn_dist_std_px=float(nn.std(ddof=1)))
