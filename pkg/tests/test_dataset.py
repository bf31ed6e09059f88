"""CSV ingestion, validation, joins, and descriptive statistics."""

import datetime

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrymetrics.dataset import (FIELD_HEADER, BoxplotStats, FieldRecord,
                                  LabRecord, Treatment, assign_block,
                                  attach_metrics, boxplot_stats,
                                  load_field_csv, load_lab_csv,
                                  load_metrics_csv, summarize,
                                  write_field_csv, write_lab_csv,
                                  write_metrics_csv)
from berrymetrics.errors import (EmptyGroup, JoinError, OutOfRange, RowError,
                                 SchemaError)
from berrymetrics.imaging import AcheneMetrics, MorphologyMetrics


def make_record(plant_id=1, berry_id=None, treatment=Treatment.BEES,
                mass=12.34, **kw):
    return FieldRecord(
        berry_id=berry_id or f"b{plant_id:03d}_1", plant_id=plant_id,
        block_id=assign_block(plant_id), treatment=treatment,
        harvest_date=datetime.date(2020, 7, 1), mass_g=mass, **kw).validate()


def test_assign_block():
    assert assign_block(1) == 1
    assert assign_block(5) == 1
    assert assign_block(6) == 2
    assert assign_block(100) == 20
    with pytest.raises(OutOfRange):
        assign_block(0)
    with pytest.raises(OutOfRange):
        assign_block(101)


def test_field_record_validation():
    with pytest.raises(ValueError):
        make_record(plant_id=7, mass=-1.0)
    with pytest.raises(ValueError):
        make_record(mass=1.005)     # not a multiple of 0.01
    with pytest.raises(ValueError):
        FieldRecord(berry_id="x", plant_id=7, block_id=1,
                    treatment=Treatment.BEES,
                    harvest_date=datetime.date(2020, 7, 1),
                    mass_g=1.0).validate()   # wrong block


def test_field_csv_round_trip_is_byte_identical(tmp_path):
    records = [make_record(plant_id=i, treatment=t)
               for i, t in zip(range(1, 9), list(Treatment) * 2)]
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_field_csv(p1, records)
    write_field_csv(p2, load_field_csv(p1))
    assert p1.read_bytes() == p2.read_bytes()


def test_field_csv_header_mismatch(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(SchemaError):
        load_field_csv(p)


def test_field_csv_row_error_reports_row_and_field(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(",".join(FIELD_HEADER) + "\n"
                 "b1,1,1,bees,2020-07-01,10.00,,\n"
                 "b2,2,1,flamingo,2020-07-01,10.00,,\n")
    with pytest.raises(RowError) as exc:
        load_field_csv(p)
    assert exc.value.row == 3
    assert exc.value.field == "treatment"


def test_lab_record_validation():
    good = LabRecord(experiment="height", trial_id=1, level=0.9,
                     unit_kind="dish", unit_position=1,
                     response_name="powder_loss_g", response_value=1.5)
    good.validate()
    with pytest.raises(ValueError):    # slide must carry particle_count
        LabRecord(experiment="height", trial_id=1, level=0.9,
                  unit_kind="slide", unit_position=1,
                  response_name="powder_loss_g",
                  response_value=1.5).validate()
    with pytest.raises(ValueError):    # counts must be integral
        LabRecord(experiment="pattern", trial_id=1, level="hover",
                  unit_kind="slide", unit_position=1,
                  response_name="particle_count",
                  response_value=3.5).validate()
    with pytest.raises(ValueError):    # unknown pattern level
        LabRecord(experiment="pattern", trial_id=1, level="loop",
                  unit_kind="slide", unit_position=1,
                  response_name="particle_count",
                  response_value=3.0).validate()


def test_lab_csv_round_trip(tmp_path):
    records = [
        LabRecord(experiment="height", trial_id=1, level=0.6,
                  unit_kind="dish", unit_position=i,
                  response_name="powder_loss_g",
                  response_value=1.25 * i).validate()
        for i in range(1, 4)]
    p = tmp_path / "lab.csv"
    write_lab_csv(p, records)
    assert load_lab_csv(p) == records


def test_metrics_csv_round_trip(tmp_path):
    morph = MorphologyMetrics(area_in2=0.75, symmetry_pct=1.5,
                              hue_mean_deg=350.0, hue_std_deg=8.0)
    ach = AcheneMetrics(count=1, size_mean_px=8.0)
    rows = [("b001_1", "front", morph, ach)]
    p = tmp_path / "m.csv"
    write_metrics_csv(p, rows)
    loaded = load_metrics_csv(p)
    assert loaded == rows
    assert loaded[0][3].size_std_px is None


def test_attach_metrics_joins_and_strict_errors():
    rec = make_record(plant_id=1)
    morph = MorphologyMetrics(area_in2=0.5, symmetry_pct=1.0,
                              hue_mean_deg=0.0, hue_std_deg=5.0)
    ach = AcheneMetrics(count=0)
    joined = attach_metrics([rec], [(rec.berry_id, "front", morph, ach)])
    assert joined[0].front_metrics == (morph, ach)
    with pytest.raises(JoinError) as exc:
        attach_metrics([rec], [("ghost", "front", morph, ach)])
    assert exc.value.unmatched == ["ghost"]


def test_summarize_means_and_missing_metrics():
    records = [make_record(plant_id=i, treatment=t, mass=10.0 + i)
               for i, t in zip(range(1, 5), Treatment)]
    out = summarize(records)
    assert {s.treatment for s in out} == set(Treatment)
    for s in out:
        assert s.n == 1
        mean, std = s.stats["mass_g"]
        assert std is None                     # single observation
        assert s.stats["area_in2"] == (None, None)   # no metrics attached


def test_summarize_empty_group_raises():
    records = [make_record(plant_id=1, treatment=Treatment.BEES)]
    with pytest.raises(EmptyGroup):
        summarize(records)


def test_boxplot_stats_simple_oracle():
    vals = [1.0, 2.0, 3.0, 4.0, 100.0]
    records = []
    for t in Treatment:
        for i, v in enumerate(vals):
            records.append(make_record(
                plant_id=list(Treatment).index(t) + 1,
                berry_id=f"{t.value}_{i}", treatment=t, mass=v))
    stats = boxplot_stats(records, "mass_g")
    for s in stats:
        assert s.median == 3.0
        assert s.outliers == (100.0,)          # beyond the upper fence
        assert s.whisker_hi == 4.0


@given(st.lists(st.floats(min_value=0.0, max_value=1e6,
                          allow_nan=False), min_size=1, max_size=60))
@settings(max_examples=200, deadline=None)
def test_boxplot_invariants(values):
    values = [round(v, 2) for v in values]
    records = []
    for t in Treatment:
        for i, v in enumerate(values):
            records.append(make_record(
                plant_id=list(Treatment).index(t) + 1,
                berry_id=f"{t.value}_{i}", treatment=t, mass=v))
    for s in boxplot_stats(records, "mass_g"):
        assert s.minimum <= s.whisker_lo <= s.q1 <= s.median \
            <= s.q3 <= s.whisker_hi <= s.maximum
        for o in s.outliers:
            assert o < s.whisker_lo or o > s.whisker_hi
        inside = [v for v in values if s.whisker_lo <= v <= s.whisker_hi]
        assert len(inside) + len(s.outliers) == len(values)
