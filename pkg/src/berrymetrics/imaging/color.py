"""Color conversions and hue statistics."""

import numpy as np

from ..errors import AllDesaturated

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def rgb_to_hsv(pixels):
    """Vectorized RGB(uint8) -> (hue deg in [0,360), saturation, value)."""
    rgb = np.asarray(pixels, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        hp = np.where(
            c == 0, 0.0,
            np.where(v == r, ((g - b) / c) % 6.0,
                     np.where(v == g, (b - r) / c + 2.0, (r - g) / c + 4.0)))
    h = (hp * 60.0) % 360.0
    return h, s, v


def luminance(pixels):
    """Rec.601 luma of uint8 RGB, rounded back to uint8."""
    rgb = np.asarray(pixels, dtype=np.float64)
    lum = (LUMA_WEIGHTS[0] * rgb[..., 0] + LUMA_WEIGHTS[1] * rgb[..., 1]
           + LUMA_WEIGHTS[2] * rgb[..., 2])
    return np.clip(np.rint(lum), 0, 255).astype(np.uint8)


def circular_mean_std_deg(hues_deg):
    """Circular mean in [0, 360) and circular std (sqrt(-2 ln R)) in degrees."""
    rad = np.radians(np.asarray(hues_deg, dtype=np.float64))
    c = np.cos(rad).mean()
    s = np.sin(rad).mean()
    mean = np.degrees(np.arctan2(s, c)) % 360.0
    if mean >= 360.0:   # -eps % 360 can round up to exactly 360
        mean = 0.0
    r = min(float(np.hypot(c, s)), 1.0)
    if r <= 0.0:
        std = float("inf")
    else:
        std = abs(float(np.degrees(np.sqrt(abs(-2.0 * np.log(r))))))
    return float(mean), std


def hue_stats(image, mask, cfg):
    """Circular hue mean/std over mask pixels above the saturation floor."""
    h, s, _ = rgb_to_hsv(image.pixels)
    sel = mask.bits & (s >= cfg.saturation_floor)
    if not sel.any():
        raise AllDesaturated(
            f"no mask pixel has saturation >= {cfg.saturation_floor}")
    return circular_mean_std_deg(h[sel])
