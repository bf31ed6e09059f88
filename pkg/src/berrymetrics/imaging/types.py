"""Domain types for the image pipeline."""

from dataclasses import dataclass

import numpy as np

from .. import _kernels


@dataclass(frozen=True)
class RasterImage:
    """Calibrated 8-bit RGB photograph.

    pixels: (height, width, 3) uint8 array; resolution: linear pixels per
    inch, so areas convert at resolution**2 px per square inch.
    """

    pixels: np.ndarray
    resolution: float

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("pixels must be a (h, w, 3) array")
        if not self.resolution > 0:
            raise ValueError("resolution must be > 0")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BerryMask:
    """Binary berry silhouette; exactly one 4-connected component."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        object.__setattr__(self, "bits", bits)
        _, n = _kernels.label4(bits)
        if n != 1:
            raise ValueError(f"mask must have exactly one 4-connected "
                             f"component, found {n}")

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def pixel_count(self):
        return int(self.bits.sum())


@dataclass(frozen=True)
class MajorAxis:
    """Stem-to-bottom axis; endpoints in (x, y) pixel coordinates."""

    stem_point: tuple
    bottom_point: tuple

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("axis must have positive length")

    @property
    def length(self):
        dx = self.bottom_point[0] - self.stem_point[0]
        dy = self.bottom_point[1] - self.stem_point[1]
        return float(np.hypot(dx, dy))

    @property
    def direction(self):
        """Unit vector from stem to bottom."""
        dx = self.bottom_point[0] - self.stem_point[0]
        dy = self.bottom_point[1] - self.stem_point[1]
        return (dx / self.length, dy / self.length)

    @property
    def angle_from_vertical_deg(self):
        """Axis tilt from the image vertical, in [0, 180)."""
        dx, dy = self.direction
        ang = np.degrees(np.arctan2(dx, dy)) % 180.0
        return float(ang)


@dataclass(frozen=True)
class MorphologyMetrics:
    area_in2: float
    symmetry_pct: float
    hue_mean_deg: float
    hue_std_deg: float


@dataclass(frozen=True)
class AcheneDetection:
    centroid: tuple          # (x, y), sub-pixel
    area_px: float
    circularity: float
    equiv_diameter_px: float


@dataclass(frozen=True)
class AcheneMetrics:
    count: int
    size_mean_px: float | None = None
    size_std_px: float | None = None
    nn_dist_mean_px: float | None = None
    nn_dist_std_px: float | None = None
