import numpy as np
import pytest

from berrymetrics.config import ImagingConfig
from berrymetrics.synth import SynthBerrySpec, gen_berry


@pytest.fixture
def cfg():
    return ImagingConfig()


def field_row_dicts(records):
    """Minimal model-ready mappings for simulated field records."""
    return [{"mass_g": r.mass_g, "treatment": r.treatment.value,
             "plant_id": str(r.plant_id), "block_id": str(r.block_id),
             "harvest_date": r.harvest_date.isoformat()}
            for r in records]


def simple_berry(seed=0, **overrides):
    kw = dict(axis_a_px=80.0, axis_b_px=55.0, orientation_deg=0.0,
              base_hue_deg=0.0, seed=seed)
    kw.update(overrides)
    return gen_berry(SynthBerrySpec(**kw))


def angle_diff_deg(a, b):
    """Distance between two undirected axis angles, both mod 180."""
    d = abs((a - b) % 180.0)
    return min(d, 180.0 - d)


def random_mask(rng, shape=(64, 64), density=0.4):
    return rng.random(shape) < density
