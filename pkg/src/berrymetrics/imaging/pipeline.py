"""Whole-image analysis: segmentation through achene statistics."""

from contextlib import contextmanager

from ..errors import DegenerateAxis, ImagingError, StageError
from .achenes import achene_metrics, detect_achenes
from .color import hue_stats
from .geometry import area_in2, compute_axis, symmetry, vertical_axis
from .segmentation import segment
from .types import MorphologyMetrics


@contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except ImagingError as exc:
        raise StageError(name, exc) from exc


def analyze_image(image, cfg):
    """Run the full pipeline on one photograph.

    Returns (MorphologyMetrics, AcheneMetrics). Failures surface as
    StageError tagged with the stage that raised; a near-circular berry is
    not a failure, it falls back to the vertical axis.
    """
    with _stage("segment"):
        mask = segment(image, cfg)
    with _stage("axis"):
        try:
            axis = compute_axis(image, mask, cfg)
        except DegenerateAxis:
            axis = vertical_axis(mask)
    with _stage("symmetry"):
        sym = symmetry(mask, axis)
    with _stage("area"):
        area = area_in2(mask, image.resolution)
    with _stage("hue"):
        hue_mean, hue_std = hue_stats(image, mask, cfg)
    with _stage("achenes"):
        detections = detect_achenes(image, mask, cfg)
        ach = achene_metrics(detections)
    morph = MorphologyMetrics(area_in2=area, symmetry_pct=sym,
                              hue_mean_deg=hue_mean, hue_std_deg=hue_std)
    return morph, ach
