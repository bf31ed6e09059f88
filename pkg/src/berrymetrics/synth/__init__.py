from .berry import GroundTruth, SynthBerrySpec, gen_berry
from .dataset import (FieldDesignSpec, LabDesignSpec, gen_field_dataset,
                      gen_lab_dataset)

__all__ = [
    "FieldDesignSpec", "GroundTruth", "LabDesignSpec", "SynthBerrySpec",
    "gen_berry", "gen_field_dataset", "gen_lab_dataset",
]
