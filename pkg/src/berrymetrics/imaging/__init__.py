from .achenes import (achene_metrics, detect_achenes,
                      nearest_neighbor_distances, otsu_threshold)
from .color import circular_mean_std_deg, hue_stats, luminance, rgb_to_hsv
from .geometry import area_in2, compute_axis, symmetry, vertical_axis
from .io import load_image, save_png
from .pipeline import analyze_image
from .segmentation import estimate_backdrop, segment
from .types import (AcheneDetection, AcheneMetrics, BerryMask, MajorAxis,
                    MorphologyMetrics, RasterImage)

__all__ = [
    "AcheneDetection", "AcheneMetrics", "BerryMask", "MajorAxis",
    "MorphologyMetrics", "RasterImage",
    "achene_metrics", "analyze_image", "area_in2", "circular_mean_std_deg",
    "compute_axis", "detect_achenes", "estimate_backdrop", "hue_stats",
    "load_image", "luminance", "nearest_neighbor_distances",
    "otsu_threshold", "rgb_to_hsv", "save_png", "segment", "symmetry",
    "vertical_axis",
]
