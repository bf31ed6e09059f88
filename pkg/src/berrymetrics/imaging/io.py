"""Image file loading (PNG/JPEG, 8-bit RGB)."""

from PIL import Image

import numpy as np

from .types import RasterImage

DEFAULT_PPI = 300.0


def load_image(path, resolution=DEFAULT_PPI):
    """Load a PNG or JPEG file as an 8-bit RGB RasterImage."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        pixels = np.asarray(rgb, dtype=np.uint8)
    return RasterImage(pixels=pixels, resolution=float(resolution))


def save_png(path, pixels):
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="RGB").save(
        path, format="PNG")
