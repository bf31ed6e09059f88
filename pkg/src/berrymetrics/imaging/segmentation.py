"""Backdrop removal and berry silhouette extraction."""

import numpy as np
from scipy import ndimage

from .. import _kernels
from ..errors import NoForeground
from .types import BerryMask

_CORNER_PATCH = 5
_STRUCT3 = np.ones((3, 3), dtype=bool)


def estimate_backdrop(image):
    """Mean RGB over 5x5 patches at the four image corners."""
    px = image.pixels
    k = min(_CORNER_PATCH, px.shape[0], px.shape[1])
    patches = [px[:k, :k], px[:k, -k:], px[-k:, :k], px[-k:, -k:]]
    stacked = np.concatenate([p.reshape(-1, 3) for p in patches])
    return tuple(stacked.mean(axis=0))


def segment(image, cfg):
    """Largest non-backdrop 4-connected component after open/close cleanup.

    Raises NoForeground when nothing at least cfg.min_mask_pixels survives.
    """
    backdrop = cfg.backdrop_color
    if backdrop is None:
        backdrop = estimate_backdrop(image)
    diff = image.pixels.astype(np.float64) - np.asarray(backdrop, dtype=np.float64)
    fg = np.sqrt((diff ** 2).sum(axis=-1)) > cfg.backdrop_tolerance
    fg = ndimage.binary_opening(fg, structure=_STRUCT3)
    fg = ndimage.binary_closing(fg, structure=_STRUCT3)
    labels, n = _kernels.label4(fg)
    if n == 0:
        raise NoForeground("no non-backdrop pixels after cleanup")
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    best = int(counts.argmax()) + 1
    if counts[best - 1] < cfg.min_mask_pixels:
        raise NoForeground(
            f"largest component has {counts[best - 1]} px "
            f"(< {cfg.min_mask_pixels})")
    return BerryMask(labels == best)
