"""Synthetic berry renderer with exact ground truth.

Flat-shaded: an ellipse (optionally skewed across its axis) on a uniform
backdrop, with dark achene disks, optional green calyx patch, additive hue
noise, and optional backdrop specks. Everything is deterministic per seed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import LayoutOverflow
from ..imaging.types import RasterImage

BERRY_SAT = 0.85
BERRY_VAL = 0.85
ACHENE_RGB = (38, 30, 22)
CALYX_RGB = (60, 150, 60)
CALYX_RADIUS = 12.0
SPECK_RGB = (90, 80, 70)
EDGE_PAD = 24


@dataclass(frozen=True)
class SynthBerrySpec:
    axis_a_px: float                 # semi-axis along the berry axis
    axis_b_px: float                 # semi-axis across it
    orientation_deg: float = 0.0     # axis tilt from vertical
    skew: float = 0.0                # one-sided widening; 0 = symmetric
    base_hue_deg: float = 0.0
    hue_std_deg: float = 0.0
    achene_count: int = 0
    achene_diameter_px: float = 8.0
    achene_layout: str = "poisson"   # poisson | grid
    achene_grid_pitch_px: float | None = None
    calyx: bool = False
    backdrop_color: tuple = (235, 235, 235)
    ppi: float = 150.0
    seed: int = 0
    noise_specks: int = 0

    def __post_init__(self):
        if self.axis_a_px <= 0 or self.axis_b_px <= 0:
            raise ValueError("ellipse axes must be > 0")
        if self.achene_count < 0:
            raise ValueError("achene_count must be >= 0")
        if self.achene_count > 0 and self.achene_diameter_px <= 0:
            raise ValueError("achene diameter must be > 0")
        if self.achene_layout not in ("poisson", "grid"):
            raise ValueError("achene_layout must be poisson or grid")
        if self.skew < 0:
            raise ValueError("skew must be >= 0")
        if not self.ppi > 0:
            raise ValueError("ppi must be > 0")

    @property
    def analytic_area_px2(self):
        """Exact area of the (possibly skewed) generating ellipse."""
        return math.pi * self.axis_a_px * self.axis_b_px * (1 + self.skew / 2)


@dataclass(frozen=True)
class GroundTruth:
    mask: np.ndarray                 # rendered berry + calyx silhouette
    ellipse_mask: np.ndarray         # berry body only
    axis_angle_deg: float            # tilt from vertical, [0, 180)
    area_analytic_in2: float
    area_mask_in2: float
    stem_point: tuple                # (x, y); where the calyx sits
    achene_centroids: tuple          # ((x, y), ...)
    achene_diameter_px: float
    nn_dist_px: tuple = field(default=())


def _hsv_to_rgb(h_deg, s, v):
    """HSV -> RGB in [0, 1] for a 1-D array of hues (scalar s, v)."""
    h = (np.asarray(h_deg, dtype=np.float64).ravel() % 360.0) / 60.0
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    ones = np.ones_like(f)
    p = ones * (v * (1 - s))
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    choices = np.stack([
        np.stack([ones * v, t, p], axis=-1),
        np.stack([q, ones * v, p], axis=-1),
        np.stack([p, ones * v, t], axis=-1),
        np.stack([p, q, ones * v], axis=-1),
        np.stack([t, p, ones * v], axis=-1),
        np.stack([ones * v, p, q], axis=-1),
    ])
    return choices[i, np.arange(h.size)]


def _ellipse_mask(shape, center, d, e, a, b, skew):
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    px = xx - center[0]
    py = yy - center[1]
    t = px * d[0] + py * d[1]
    s = px * e[0] + py * e[1]
    b_side = np.where(s > 0, b * (1 + skew), b)
    return (t / a) ** 2 + (s / b_side) ** 2 <= 1.0


def _grid_points(spec, center, d, e, inner_a, inner_b):
    count = spec.achene_count
    side = math.ceil(math.sqrt(count))
    pitch = spec.achene_grid_pitch_px
    if pitch is None:
        pitch = 2 * min(inner_a, inner_b) / (side + 1)
    pts = []
    offset = (side - 1) / 2.0
    for i in range(side):
        for j in range(side):
            if len(pts) >= count:
                break
            t = (i - offset) * pitch
            s = (j - offset) * pitch
            if (t / inner_a) ** 2 + (s / inner_b) ** 2 > 1.0:
                raise LayoutOverflow(
                    f"grid of {count} achenes at pitch {pitch:.1f} px does "
                    "not fit inside the berry")
            pts.append((center[0] + t * d[0] + s * e[0],
                        center[1] + t * d[1] + s * e[1]))
    return pts


def _poisson_points(spec, center, d, e, inner_a, inner_b, rng):
    count = spec.achene_count
    min_sep = spec.achene_diameter_px + 2.0
    pts = []
    for _ in range(20000):
        if len(pts) >= count:
            break
        t = rng.uniform(-inner_a, inner_a)
        s = rng.uniform(-inner_b, inner_b)
        if (t / inner_a) ** 2 + (s / inner_b) ** 2 > 1.0:
            continue
        x = center[0] + t * d[0] + s * e[0]
        y = center[1] + t * d[1] + s * e[1]
        if all((x - px) ** 2 + (y - py) ** 2 >= min_sep ** 2
               for px, py in pts):
            pts.append((x, y))
    if len(pts) < count:
        raise LayoutOverflow(
            f"could only place {len(pts)}/{count} achenes at separation "
            f">= {min_sep:.1f} px")
    return pts


def gen_berry(spec):
    """Render a berry photograph; returns (RasterImage, GroundTruth)."""
    rng = np.random.default_rng(spec.seed)
    a, b = spec.axis_a_px, spec.axis_b_px
    theta = math.radians(spec.orientation_deg)
    d = (math.sin(theta), math.cos(theta))     # along axis, y down
    e = (math.cos(theta), -math.sin(theta))    # across axis

    half_w = abs(a * d[0]) + abs(b * (1 + spec.skew) * e[0])
    half_h = abs(a * d[1]) + abs(b * (1 + spec.skew) * e[1])
    pad = EDGE_PAD + (CALYX_RADIUS if spec.calyx else 0)
    w = int(2 * (half_w + pad)) + 1
    h = int(2 * (half_h + pad)) + 1
    center = ((w - 1) / 2.0, (h - 1) / 2.0)

    ellipse = _ellipse_mask((h, w), center, d, e, a, b, spec.skew)
    pixels = np.empty((h, w, 3), dtype=np.uint8)
    pixels[:] = np.asarray(spec.backdrop_color, dtype=np.uint8)

    n_body = int(ellipse.sum())
    hues = spec.base_hue_deg + rng.normal(0.0, spec.hue_std_deg, size=n_body)
    body = _hsv_to_rgb(hues, BERRY_SAT, BERRY_VAL)
    pixels[ellipse] = np.clip(np.rint(body * 255.0), 0, 255).astype(np.uint8)

    yy, xx = np.mgrid[0:h, 0:w]
    mask = ellipse.copy()

    stem = (center[0] - a * d[0], center[1] - a * d[1])
    if spec.calyx:
        calyx = (xx - stem[0]) ** 2 + (yy - stem[1]) ** 2 <= CALYX_RADIUS ** 2
        pixels[calyx] = np.asarray(CALYX_RGB, dtype=np.uint8)
        mask |= calyx

    # Achenes, kept clear of the rim so thresholding cannot merge them
    # with the backdrop.
    pts = []
    if spec.achene_count > 0:
        r_ach = spec.achene_diameter_px / 2.0
        inner_a = a - r_ach - 4.0
        inner_b = b - r_ach - 4.0
        if inner_a <= 0 or inner_b <= 0:
            raise LayoutOverflow("achenes do not fit inside the berry")
        if spec.achene_layout == "grid":
            pts = _grid_points(spec, center, d, e, inner_a, inner_b)
        else:
            pts = _poisson_points(spec, center, d, e, inner_a, inner_b, rng)
        for (x, y) in pts:
            disk = (xx - x) ** 2 + (yy - y) ** 2 <= r_ach ** 2
            pixels[disk] = np.asarray(ACHENE_RGB, dtype=np.uint8)

    for _ in range(spec.noise_specks):
        for _attempt in range(1000):
            sx = rng.integers(2, w - 3)
            sy = rng.integers(2, h - 3)
            r_s = rng.uniform(1.0, 3.5)
            speck = (xx - sx) ** 2 + (yy - sy) ** 2 <= r_s ** 2
            if not (speck & mask).any():
                pixels[speck] = np.asarray(SPECK_RGB, dtype=np.uint8)
                break

    nn = ()
    if len(pts) >= 2:
        arr = np.asarray(pts)
        d2 = ((arr[:, None, :] - arr[None, :, :]) ** 2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        nn = tuple(float(x) for x in np.sqrt(d2.min(axis=1)))

    truth = GroundTruth(
        mask=mask,
        ellipse_mask=ellipse,
        axis_angle_deg=spec.orientation_deg % 180.0,
        area_analytic_in2=spec.analytic_area_px2 / spec.ppi ** 2,
        area_mask_in2=float(mask.sum()) / spec.ppi ** 2,
        stem_point=stem,
        achene_centroids=tuple((float(x), float(y)) for x, y in pts),
        achene_diameter_px=spec.achene_diameter_px,
        nn_dist_px=nn)
    return RasterImage(pixels=pixels, resolution=spec.ppi), truth
