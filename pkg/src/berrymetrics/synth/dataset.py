"""Simulated experiment datasets drawn from exact linear mixed models."""

import datetime
import math
from dataclasses import dataclass, field

import numpy as np

from ..dataset import (FieldRecord, LabRecord, PATTERN_LEVELS, Treatment,
                       assign_block)

DEFAULT_START = datetime.date(2020, 6, 27)


def _check_variances(*vals):
    for v in vals:
        if v < 0:
            raise ValueError("variances must be >= 0")


@dataclass(frozen=True)
class FieldDesignSpec:
    """Field experiment shape: a row of plants in blocks of five.

    assignment 'within_block' randomizes treatments across the plants of
    each block; 'by_block' gives every plant of a block the same treatment.
    """

    n_plants: int = 100
    plants_per_block: int = 5
    berries_per_plant: int = 8
    n_days: int = 12
    start_date: datetime.date = DEFAULT_START
    assignment: str = "within_block"
    intercept: float = 20.0
    effects: dict = field(default_factory=dict)   # Treatment -> mean shift
    tau2_plant: float = 1.0
    tau2_block: float = 1.0
    tau2_day: float = 0.0
    sigma2: float = 25.0
    seed: int = 0

    def __post_init__(self):
        if self.n_plants < 1 or self.berries_per_plant < 1 or self.n_days < 1:
            raise ValueError("design counts must be >= 1")
        if self.assignment not in ("within_block", "by_block"):
            raise ValueError("assignment must be within_block or by_block")
        _check_variances(self.tau2_plant, self.tau2_block, self.tau2_day,
                         self.sigma2)


def gen_field_dataset(spec):
    """Simulate field records; returns (records, truth dict)."""
    rng = np.random.default_rng(spec.seed)
    treatments = list(Treatment)
    n_blocks = math.ceil(spec.n_plants / spec.plants_per_block)

    plant_trt = {}
    if spec.assignment == "by_block":
        # Whole blocks get one treatment, allocated as evenly as possible.
        pool = [treatments[i % len(treatments)] for i in range(n_blocks)]
        rng.shuffle(pool)
        for plant in range(1, spec.n_plants + 1):
            plant_trt[plant] = pool[assign_block(plant) - 1]
    else:
        for blk in range(n_blocks):
            lo = blk * spec.plants_per_block + 1
            hi = min(lo + spec.plants_per_block, spec.n_plants + 1)
            size = hi - lo
            pool = [treatments[i % len(treatments)] for i in range(size)]
            rng.shuffle(pool)
            for plant, trt in zip(range(lo, hi), pool):
                plant_trt[plant] = trt

    u_plant = rng.normal(0, math.sqrt(spec.tau2_plant), spec.n_plants)
    u_block = rng.normal(0, math.sqrt(spec.tau2_block), n_blocks)
    u_day = rng.normal(0, math.sqrt(spec.tau2_day), spec.n_days)

    records = []
    for plant in range(1, spec.n_plants + 1):
        block = assign_block(plant)
        trt = plant_trt[plant]
        for k in range(spec.berries_per_plant):
            day = int(rng.integers(0, spec.n_days))
            mu = (spec.intercept + spec.effects.get(trt, 0.0)
                  + u_plant[plant - 1] + u_block[block - 1] + u_day[day])
            mass = max(round(mu + rng.normal(0, math.sqrt(spec.sigma2)), 2),
                       0.0)
            records.append(FieldRecord(
                berry_id=f"b{plant:03d}_{k + 1}",
                plant_id=plant, block_id=block, treatment=trt,
                harvest_date=spec.start_date + datetime.timedelta(days=day),
                mass_g=mass).validate())
    truth = {
        "intercept": spec.intercept,
        "effects": {t.value: spec.effects.get(t, 0.0) for t in treatments},
        "tau2_plant": spec.tau2_plant,
        "tau2_block": spec.tau2_block,
        "tau2_day": spec.tau2_day,
        "sigma2": spec.sigma2,
        "seed": spec.seed,
        "n_records": len(records),
    }
    return records, truth


@dataclass(frozen=True)
class LabDesignSpec:
    """Lab experiment shape for either the height or pattern study."""

    experiment: str = "height"               # height | pattern
    levels: tuple = (0.6, 0.9, 1.2, 1.5)     # metres, or pattern names
    n_dishes: int = 5
    n_slides: int = 4
    n_trials: int = 3
    loss_intercept: float = 2.0
    count_intercept: float = 120.0
    effects: dict = field(default_factory=dict)   # level -> mean shift
    tau2_dish: float = 0.05
    tau2_slide: float = 100.0
    tau2_trial_loss: float = 0.05
    tau2_trial_count: float = 100.0
    sigma2_loss: float = 0.1
    sigma2_count: float = 400.0
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in ("height", "pattern"):
            raise ValueError("experiment must be height or pattern")
        if self.experiment == "pattern":
            bad = set(self.levels) - set(PATTERN_LEVELS)
            if bad:
                raise ValueError(f"unknown pattern levels {sorted(bad)}")
        if min(self.n_dishes, self.n_slides, self.n_trials) < 1:
            raise ValueError("design counts must be >= 1")
        _check_variances(self.tau2_dish, self.tau2_slide,
                         self.tau2_trial_loss, self.tau2_trial_count,
                         self.sigma2_loss, self.sigma2_count)


def gen_lab_dataset(spec):
    """Simulate lab records (dish losses + slide counts) for every level."""
    rng = np.random.default_rng(spec.seed)
    n_trials_total = len(spec.levels) * spec.n_trials
    u_dish = rng.normal(0, math.sqrt(spec.tau2_dish), spec.n_dishes)
    u_slide = rng.normal(0, math.sqrt(spec.tau2_slide), spec.n_slides)
    u_trial_loss = rng.normal(0, math.sqrt(spec.tau2_trial_loss),
                              n_trials_total)
    u_trial_count = rng.normal(0, math.sqrt(spec.tau2_trial_count),
                               n_trials_total)

    records = []
    trial_id = 0
    for level in spec.levels:
        shift = spec.effects.get(level, 0.0)
        for _ in range(spec.n_trials):
            trial_id += 1
            for dish in range(1, spec.n_dishes + 1):
                loss = (spec.loss_intercept + shift + u_dish[dish - 1]
                        + u_trial_loss[trial_id - 1]
                        + rng.normal(0, math.sqrt(spec.sigma2_loss)))
                records.append(LabRecord(
                    experiment=spec.experiment, trial_id=trial_id,
                    level=level if isinstance(level, str) else float(level),
                    unit_kind="dish", unit_position=dish,
                    response_name="powder_loss_g",
                    response_value=max(round(loss, 4), 0.0)).validate())
            for slide in range(1, spec.n_slides + 1):
                cnt = (spec.count_intercept + shift + u_slide[slide - 1]
                       + u_trial_count[trial_id - 1]
                       + rng.normal(0, math.sqrt(spec.sigma2_count)))
                records.append(LabRecord(
                    experiment=spec.experiment, trial_id=trial_id,
                    level=level if isinstance(level, str) else float(level),
                    unit_kind="slide", unit_position=slide,
                    response_name="particle_count",
                    response_value=float(max(int(round(cnt)), 0))).validate())
    truth = {
        "experiment": spec.experiment,
        "levels": list(spec.levels),
        "effects": {str(k): v for k, v in spec.effects.items()},
        "tau2_dish": spec.tau2_dish, "tau2_slide": spec.tau2_slide,
        "tau2_trial_loss": spec.tau2_trial_loss,
        "tau2_trial_count": spec.tau2_trial_count,
        "sigma2_loss": spec.sigma2_loss, "sigma2_count": spec.sigma2_count,
        "seed": spec.seed, "n_records": len(records),
    }
    return records, truth
