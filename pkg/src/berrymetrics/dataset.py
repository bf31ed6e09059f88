"""Experiment data models, CSV ingestion/validation, and descriptive stats.

CSV schemas (exact headers, comma-separated, '.' decimal, no thousands
separators):

  field:   berry_id,plant_id,block_id,treatment,harvest_date,mass_g,
           front_image,side_image
  metrics: berry_id,view,area_in2,symmetry_pct,hue_mean_deg,hue_std_deg,
           achene_count,achene_size_px,achene_size_std_px,
           achene_nn_dist_px,achene_nn_dist_std_px
  lab:     experiment,trial_id,level,unit_kind,unit_position,
           response_name,response_value
"""

import csv
import datetime
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyGroup, JoinError, OutOfRange, RowError, SchemaError
from .imaging.types import AcheneMetrics, MorphologyMetrics

PLANTS_PER_BLOCK = 5
MAX_PLANT_ID = 100

FIELD_HEADER = ["berry_id", "plant_id", "block_id", "treatment",
                "harvest_date", "mass_g", "front_image", "side_image"]
METRICS_HEADER = ["berry_id", "view", "area_in2", "symmetry_pct",
                  "hue_mean_deg", "hue_std_deg", "achene_count",
                  "achene_size_px", "achene_size_std_px",
                  "achene_nn_dist_px", "achene_nn_dist_std_px"]
LAB_HEADER = ["experiment", "trial_id", "level", "unit_kind",
              "unit_position", "response_name", "response_value"]

PATTERN_LEVELS = ("straight", "hover", "zigzag")

SUMMARY_VARIABLES = ("mass_g", "area_in2", "symmetry_pct",
                     "achene_size_px", "achene_nn_dist_px")


class Treatment(enum.Enum):
    QUADCOPTER_BEES = "quad_bees"
    QUADCOPTER = "quad"
    BEES = "bees"
    NEITHER = "neither"

    @classmethod
    def parse(cls, text):
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown treatment '{text}'") from None


def assign_block(plant_id):
    """Block id for a plant: plants run in consecutive groups of five."""
    if not 1 <= plant_id <= MAX_PLANT_ID:
        raise OutOfRange(f"plant_id {plant_id} outside 1..{MAX_PLANT_ID}")
    return math.ceil(plant_id / PLANTS_PER_BLOCK)


@dataclass(frozen=True)
class FieldRecord:
    berry_id: str
    plant_id: int
    block_id: int
    treatment: Treatment
    harvest_date: datetime.date
    mass_g: float
    front_image: str | None = None
    side_image: str | None = None
    front_metrics: tuple | None = None   # (MorphologyMetrics, AcheneMetrics)
    side_metrics: tuple | None = None

    def validate(self):
        if self.block_id != assign_block(self.plant_id):
            raise ValueError(f"block_id {self.block_id} != "
                             f"ceil({self.plant_id}/5)")
        if self.mass_g < 0:
            raise ValueError("mass_g must be >= 0")
        if abs(self.mass_g * 100 - round(self.mass_g * 100)) > 1e-6:
            raise ValueError("mass_g must be a multiple of 0.01 g")
        return self


@dataclass(frozen=True)
class LabRecord:
    experiment: str          # height | pattern
    trial_id: int
    level: float | str       # metres, or a flight-pattern name
    unit_kind: str           # dish | slide
    unit_position: int
    response_name: str       # powder_loss_g | particle_count
    response_value: float

    def validate(self):
        if self.experiment not in ("height", "pattern"):
            raise ValueError(f"unknown experiment '{self.experiment}'")
        if self.trial_id < 1:
            raise ValueError("trial_id must be >= 1")
        if self.experiment == "pattern":
            if self.level not in PATTERN_LEVELS:
                raise ValueError(f"pattern level must be one of "
                                 f"{PATTERN_LEVELS}, got '{self.level}'")
        else:
            if not (isinstance(self.level, float) and self.level > 0):
                raise ValueError("height level must be a positive number")
        if self.unit_kind not in ("dish", "slide"):
            raise ValueError(f"unknown unit_kind '{self.unit_kind}'")
        if self.unit_position < 1:
            raise ValueError("unit_position must be >= 1")
        expected = "powder_loss_g" if self.unit_kind == "dish" else "particle_count"
        if self.response_name != expected:
            raise ValueError(f"unit_kind '{self.unit_kind}' requires "
                             f"response_name '{expected}'")
        if self.response_value < 0:
            raise ValueError("response_value must be >= 0")
        if self.response_name == "particle_count" and \
                self.response_value != int(self.response_value):
            raise ValueError("particle_count must be an integer")
        return self


@dataclass(frozen=True)
class GroupSummary:
    treatment: Treatment
    n: int
    stats: dict     # variable -> (mean, std or None)


@dataclass(frozen=True)
class BoxplotStats:
    treatment: Treatment
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple


# --- CSV helpers ---

def _read_rows(path, header, kind):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise SchemaError(f"{kind} CSV is empty (missing header)") from None
        if got != header:
            raise SchemaError(f"{kind} CSV header mismatch: expected "
                              f"{header}, got {got}")
        return list(reader)


def _fmt(x, decimals=None):
    if x is None:
        return ""
    if decimals is not None:
        return f"{x:.{decimals}f}"
    return format(x, ".6g")


def load_field_csv(path):
    """Parse and validate a field-experiment CSV; row order preserved."""
    records = []
    for i, row in enumerate(_read_rows(path, FIELD_HEADER, "field"), start=2):
        if len(row) != len(FIELD_HEADER):
            raise RowError(i, "*", f"expected {len(FIELD_HEADER)} columns")
        vals = dict(zip(FIELD_HEADER, row))
        field = "berry_id"
        try:
            if not vals["berry_id"]:
                raise ValueError("berry_id must be non-empty")
            field = "plant_id"
            plant_id = int(vals["plant_id"])
            field = "block_id"
            block_id = int(vals["block_id"])
            field = "treatment"
            treatment = Treatment.parse(vals["treatment"])
            field = "harvest_date"
            harvest = datetime.date.fromisoformat(vals["harvest_date"])
            field = "mass_g"
            mass = float(vals["mass_g"])
            field = "block_id"
            rec = FieldRecord(
                berry_id=vals["berry_id"], plant_id=plant_id,
                block_id=block_id, treatment=treatment,
                harvest_date=harvest, mass_g=mass,
                front_image=vals["front_image"] or None,
                side_image=vals["side_image"] or None).validate()
        except (ValueError, OutOfRange) as exc:
            raise RowError(i, field, str(exc)) from None
        records.append(rec)
    return records


def write_field_csv(path, records):
    """Write records in canonical form: 2-decimal mass, ISO dates."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELD_HEADER)
        for r in records:
            writer.writerow([r.berry_id, r.plant_id, r.block_id,
                             r.treatment.value, r.harvest_date.isoformat(),
                             f"{r.mass_g:.2f}",
                             r.front_image or "", r.side_image or ""])


def load_lab_csv(path):
    """Parse and validate a lab-experiment CSV; row order preserved."""
    records = []
    for i, row in enumerate(_read_rows(path, LAB_HEADER, "lab"), start=2):
        if len(row) != len(LAB_HEADER):
            raise RowError(i, "*", f"expected {len(LAB_HEADER)} columns")
        vals = dict(zip(LAB_HEADER, row))
        field = "experiment"
        try:
            experiment = vals["experiment"]
            field = "trial_id"
            trial_id = int(vals["trial_id"])
            field = "level"
            level = vals["level"] if experiment == "pattern" \
                else float(vals["level"])
            field = "unit_position"
            unit_position = int(vals["unit_position"])
            field = "response_value"
            response_value = float(vals["response_value"])
            field = "response_name"
            rec = LabRecord(
                experiment=experiment, trial_id=trial_id, level=level,
                unit_kind=vals["unit_kind"], unit_position=unit_position,
                response_name=vals["response_name"],
                response_value=response_value).validate()
        except ValueError as exc:
            raise RowError(i, field, str(exc)) from None
        records.append(rec)
    return records


def write_lab_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LAB_HEADER)
        for r in records:
            level = r.level if isinstance(r.level, str) else _fmt(r.level)
            if r.response_name == "particle_count":
                value = str(int(r.response_value))
            else:
                value = f"{r.response_value:.4f}"
            writer.writerow([r.experiment, r.trial_id, level, r.unit_kind,
                             r.unit_position, r.response_name, value])


def write_metrics_csv(path, rows):
    """Write per-image metric rows: (berry_id, view, morph, achene) tuples."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for berry_id, view, morph, ach in rows:
            writer.writerow([
                berry_id, view,
                _fmt(morph.area_in2), _fmt(morph.symmetry_pct),
                _fmt(morph.hue_mean_deg), _fmt(morph.hue_std_deg),
                ach.count,
                _fmt(ach.size_mean_px), _fmt(ach.size_std_px),
                _fmt(ach.nn_dist_mean_px), _fmt(ach.nn_dist_std_px)])


def load_metrics_csv(path):
    """Parse a metrics CSV into (berry_id, view, morph, achene) tuples."""
    rows = []
    for i, row in enumerate(_read_rows(path, METRICS_HEADER, "metrics"),
                            start=2):
        if len(row) != len(METRICS_HEADER):
            raise RowError(i, "*", f"expected {len(METRICS_HEADER)} columns")
        vals = dict(zip(METRICS_HEADER, row))
        try:
            morph = MorphologyMetrics(
                area_in2=float(vals["area_in2"]),
                symmetry_pct=float(vals["symmetry_pct"]),
                hue_mean_deg=float(vals["hue_mean_deg"]),
                hue_std_deg=float(vals["hue_std_deg"]))
            opt = lambda s: float(s) if s else None
            ach = AcheneMetrics(
                count=int(vals["achene_count"]),
                size_mean_px=opt(vals["achene_size_px"]),
                size_std_px=opt(vals["achene_size_std_px"]),
                nn_dist_mean_px=opt(vals["achene_nn_dist_px"]),
                nn_dist_std_px=opt(vals["achene_nn_dist_std_px"]))
        except ValueError as exc:
            raise RowError(i, "*", str(exc)) from None
        rows.append((vals["berry_id"], vals["view"], morph, ach))
    return rows


def attach_metrics(records, metric_rows, strict=True):
    """Join metric rows onto field records by berry_id.

    With strict=True, metric rows whose berry_id matches no record raise
    JoinError.
    """
    by_id = {r.berry_id: r for r in records}
    unmatched = {bid for bid, *_ in metric_rows if bid not in by_id}
    if strict and unmatched:
        raise JoinError(unmatched)
    for berry_id, view, morph, ach in metric_rows:
        if berry_id not in by_id:
            continue
        rec = by_id[berry_id]
        key = "front_metrics" if view == "front" else "side_metrics"
        by_id[berry_id] = replace(rec, **{key: (morph, ach)})
    return [by_id[r.berry_id] for r in records]


# --- descriptive statistics ---

def _variable_values(record, variable):
    if variable == "mass_g":
        return record.mass_g
    if record.front_metrics is None:
        return None
    morph, ach = record.front_metrics
    return {
        "area_in2": morph.area_in2,
        "symmetry_pct": morph.symmetry_pct,
        "achene_size_px": ach.size_mean_px,
        "achene_nn_dist_px": ach.nn_dist_mean_px,
    }.get(variable)


def _group(records):
    groups = {t: [] for t in Treatment}
    for r in records:
        groups[r.treatment].append(r)
    return groups


def summarize(records):
    """Per-treatment mean/sample-std of each Table-style variable.

    Variables are taken from the front-view metrics; a variable missing on
    a record is skipped for that record only.
    """
    out = []
    for treatment, group in _group(records).items():
        if not group:
            raise EmptyGroup(treatment.value)
        stats = {}
        for var in SUMMARY_VARIABLES:
            vals = [v for v in (_variable_values(r, var) for r in group)
                    if v is not None]
            if not vals:
                stats[var] = (None, None)
                continue
            arr = np.asarray(vals, dtype=np.float64)
            std = float(arr.std(ddof=1)) if arr.size > 1 else None
            stats[var] = (float(arr.mean()), std)
        out.append(GroupSummary(treatment=treatment, n=len(group),
                                stats=stats))
    return out


def boxplot_stats(records, variable):
    """Tukey box stats per treatment: type-7 quartiles, 1.5 IQR whiskers."""
    out = []
    for treatment, group in _group(records).items():
        vals = [v for v in (_variable_values(r, variable) for r in group)
                if v is not None]
        if not vals:
            raise EmptyGroup(treatment.value)
        arr = np.sort(np.asarray(vals, dtype=np.float64))
        q1, med, q3 = np.percentile(arr, [25, 50, 75])
        iqr = q3 - q1
        in_lo = arr[arr >= q1 - 1.5 * iqr]
        in_hi = arr[arr <= q3 + 1.5 * iqr]
        # Furthest datum inside the fence, clamped so the ordering chain
        # min <= whisker_lo <= q1 <= median <= q3 <= whisker_hi <= max holds
        # even for degenerate spreads.
        whisker_lo = min(float(in_lo[0]), float(q1)) if in_lo.size else float(q1)
        whisker_hi = max(float(in_hi[-1]), float(q3)) if in_hi.size else float(q3)
        outliers = arr[(arr < whisker_lo) | (arr > whisker_hi)]
        out.append(BoxplotStats(
            treatment=treatment, minimum=float(arr[0]), q1=float(q1),
            median=float(med), q3=float(q3), maximum=float(arr[-1]),
            whisker_lo=whisker_lo, whisker_hi=whisker_hi,
            outliers=tuple(float(x) for x in outliers)))
    return out
