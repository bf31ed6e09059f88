"""Imaging configuration and the plain-text key=value config format."""

from dataclasses import dataclass, replace, fields


@dataclass(frozen=True)
class ImagingConfig:
    """Tunable constants of the image pipeline.

    backdrop_color is None to auto-estimate from the four image corners.
    Diameters are equivalent diameters in px; tolerance is Euclidean RGB.
    """

    backdrop_color: tuple | None = None
    backdrop_tolerance: float = 40.0
    min_mask_pixels: int = 500
    achene_d_min: float = 4.0
    achene_d_max: float = 60.0
    achene_circularity_min: float = 0.6
    achene_threshold: int | None = None   # fixed luminance threshold; None = Otsu
    achene_max_dark_fraction: float = 0.25  # dark class must stay a minority
    achene_min_contrast: float = 30.0     # min light-dark class mean gap (luma)
    saturation_floor: float = 0.05
    stem_probe_radius: int = 15
    stem_hue_margin: float = 0.05

    def with_overrides(self, **kw):
        return replace(self, **kw)


_INT_KEYS = {"min_mask_pixels", "achene_threshold", "stem_probe_radius"}


def parse_config_text(text):
    """Parse `key = value` lines ('#' comments) into an ImagingConfig."""
    known = {f.name for f in fields(ImagingConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key '{key}'")
        if key == "backdrop_color":
            parts = [int(p) for p in val.split(",")]
            if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
                raise ValueError(f"config line {lineno}: backdrop_color "
                                 "must be 'r,g,b' in 0..255")
            out[key] = tuple(parts)
        elif key in _INT_KEYS:
            out[key] = int(val)
        else:
            out[key] = float(val)
    return ImagingConfig(**out)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
