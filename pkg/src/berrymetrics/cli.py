"""Command-line front end: analyze, fit, compare, power, report, synth."""

import csv
import datetime
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields as dc_fields
from pathlib import Path

import click

from . import __version__, report as report_mod
from .config import ImagingConfig, load_config
from .dataset import (FIELD_HEADER, LAB_HEADER, SUMMARY_VARIABLES, Treatment,
                      _variable_values, attach_metrics, boxplot_stats,
                      load_field_csv, load_lab_csv, load_metrics_csv,
                      summarize, write_field_csv, write_lab_csv,
                      write_metrics_csv)
from .errors import (BerrymetricsError, DatasetError, ModelError,
                     NonConvergence)
from .imaging import analyze_image, load_image, save_png
from .imaging.io import DEFAULT_PPI
from .mixedmodel import (ModelSpec, build_design, dumps, fit_design,
                         fit_to_dict, pairwise, pairwise_to_dict, power_mc,
                         power_to_dict)
from .synth import (FieldDesignSpec, LabDesignSpec, SynthBerrySpec, gen_berry,
                    gen_field_dataset, gen_lab_dataset)

EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_cfg(config_path):
    if config_path is None:
        return ImagingConfig()
    try:
        return load_config(config_path)
    except (OSError, ValueError) as exc:
        _fail(EXIT_VALIDATION, f"config: {exc}")


def _provenance(inputs, seed=None, cfg=None):
    prov = {"tool_version": __version__,
            "inputs": {str(p): report_mod.sha256_file(p) for p in inputs}}
    if seed is not None:
        prov["seed"] = int(seed)
    if cfg is not None:
        prov["config"] = {f.name: getattr(cfg, f.name)
                          for f in dc_fields(cfg)}
    return prov


@click.group()
@click.version_option(__version__)
def main():
    """Berry image morphometrics and mixed-model analysis."""


# --- analyze ---

def _analyze_one(path_str, ppi, cfg):
    """Worker for process fan-out; returns (error or None, morph, achenes)."""
    try:
        image = load_image(path_str, resolution=ppi)
        morph, ach = analyze_image(image, cfg)
        return None, morph, ach
    except Exception as exc:   # fault isolation: report, don't crash the run
        return f"{type(exc).__name__}: {exc}", None, None


def _id_and_view(stem):
    if stem.endswith("_front"):
        return stem[:-len("_front")], "front"
    if stem.endswith("_side"):
        return stem[:-len("_side")], "side"
    return stem, "front"


@main.command()
@click.argument("image_dir", type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Imaging config file (key = value lines).")
@click.option("--ppi", type=float, default=DEFAULT_PPI, show_default=True,
              help="Pixels per inch of the photographs.")
@click.option("--out", type=click.Path(), default="metrics.csv",
              show_default=True, help="Output metrics CSV.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel worker processes.")
def analyze(image_dir, config_path, ppi, out, jobs):
    """Measure every berry photograph in IMAGE_DIR into a metrics CSV.

    Files are expected to be named <berry_id>_front.* or <berry_id>_side.*;
    *_mask.* files are ignored. Per-file failures are logged and skipped.
    """
    cfg = _load_cfg(config_path)
    root = Path(image_dir)
    if not root.is_dir():
        _fail(EXIT_INPUT, f"'{image_dir}' is not a readable directory")
    paths = sorted(p for p in root.iterdir()
                   if p.suffix.lower() in IMAGE_SUFFIXES
                   and not p.stem.endswith("_mask"))
    if not paths:
        _fail(EXIT_INPUT, f"no images found in '{image_dir}'")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_analyze_one, [str(p) for p in paths],
                                    [ppi] * len(paths), [cfg] * len(paths)))
    else:
        results = [_analyze_one(str(p), ppi, cfg) for p in paths]

    rows = []
    for path, (err, morph, ach) in zip(paths, results):
        if err is not None:
            click.echo(f"skip {path.name}: {err}", err=True)
            continue
        berry_id, view = _id_and_view(path.stem)
        rows.append((berry_id, view, morph, ach))
    if not rows:
        _fail(EXIT_INPUT, "every image failed; no metrics produced")
    write_metrics_csv(out, rows)
    click.echo(f"wrote {len(rows)} rows ({len(paths) - len(rows)} skipped) "
               f"to {out}")


# --- model-fitting commands ---

def _detect_csv_kind(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            header = next(csv.reader(fh), [])
    except OSError as exc:
        _fail(EXIT_INPUT, str(exc))
    if header == FIELD_HEADER:
        return "field"
    if header == LAB_HEADER:
        return "lab"
    _fail(EXIT_VALIDATION, f"'{path}' matches neither the field nor the "
          "lab CSV schema")


def _field_row_dict(rec):
    row = {
        "berry_id": rec.berry_id,
        "plant_id": str(rec.plant_id),
        "block_id": str(rec.block_id),
        "treatment": rec.treatment.value,
        "harvest_date": rec.harvest_date.isoformat(),
        "mass_g": rec.mass_g,
    }
    if rec.front_metrics is not None:
        morph, ach = rec.front_metrics
        row.update(area_in2=morph.area_in2, symmetry_pct=morph.symmetry_pct,
                   hue_mean_deg=morph.hue_mean_deg,
                   hue_std_deg=morph.hue_std_deg,
                   achene_count=float(ach.count),
                   achene_size_px=ach.size_mean_px,
                   achene_nn_dist_px=ach.nn_dist_mean_px)
    return row


def _lab_row_dict(rec):
    row = {
        "experiment": rec.experiment,
        "trial_id": str(rec.trial_id),
        "level": rec.level if isinstance(rec.level, str) else
        format(rec.level, ".6g"),
        "unit_kind": rec.unit_kind,
        "unit_position": str(rec.unit_position),
        "response_name": rec.response_name,
        "response_value": rec.response_value,
    }
    # Virtual column so models can address the measured quantity by name
    # (rows of the other unit kind simply lack it and are dropped).
    row[rec.response_name] = rec.response_value
    return row


def _parse_model_file(path):
    out = {"response": None, "fixed": None, "random": []}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"model line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key in ("response", "fixed"):
                out[key] = val
            elif key == "random":
                out["random"].extend(
                    v.strip() for v in val.split(",") if v.strip())
            else:
                raise ValueError(f"model line {lineno}: unknown key '{key}'")
    if not out["response"] or not out["fixed"]:
        raise ValueError("model file must set response and fixed")
    return out


def _model_spec(response, fixed, random, model_path):
    try:
        if model_path is not None:
            parsed = _parse_model_file(model_path)
            return ModelSpec(response=parsed["response"],
                             fixed_factor=parsed["fixed"],
                             random_factors=tuple(parsed["random"]))
        if not response or not fixed:
            raise ValueError("provide --model, or both --response and "
                             "--fixed")
        return ModelSpec(response=response, fixed_factor=fixed,
                         random_factors=tuple(random))
    except (OSError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _load_rows(data_csv, metrics_path):
    kind = _detect_csv_kind(data_csv)
    try:
        if kind == "field":
            records = load_field_csv(data_csv)
            if metrics_path:
                records = attach_metrics(records,
                                         load_metrics_csv(metrics_path))
            return [_field_row_dict(r) for r in records]
        if metrics_path:
            _fail(EXIT_VALIDATION, "--metrics only applies to field CSVs")
        return [_lab_row_dict(r) for r in load_lab_csv(data_csv)]
    except DatasetError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _fit_or_die(rows, spec):
    try:
        design = build_design(rows, spec)
        fit = fit_design(design)
    except ModelError as exc:
        code = EXIT_CONVERGENCE if isinstance(exc, NonConvergence) \
            else EXIT_VALIDATION
        _fail(code, str(exc))
    if not fit.converged:
        _fail(EXIT_CONVERGENCE, "REML did not converge")
    return fit


def _write_json(out, payload):
    text = dumps(payload)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")


MODEL_OPTIONS = [
    click.option("--response", default=None,
                 help="Response column (or lab response name)."),
    click.option("--fixed", default=None, help="Fixed factor column."),
    click.option("--random", multiple=True,
                 help="Random-intercept factor column (repeatable)."),
    click.option("--model", "model_path", type=click.Path(exists=True),
                 default=None, help="Plain-text model file."),
    click.option("--metrics", "metrics_path", type=click.Path(exists=True),
                 default=None,
                 help="Metrics CSV to join onto a field CSV by berry_id."),
    click.option("--out", type=click.Path(), default=None,
                 help="Output JSON path (default: stdout)."),
]


def _with_model_options(fn):
    for opt in reversed(MODEL_OPTIONS):
        fn = opt(fn)
    return fn


def _model_dict(spec):
    return {"response": spec.response, "fixed": spec.fixed_factor,
            "random": list(spec.random_factors)}


@main.command()
@click.argument("data_csv", type=click.Path(exists=True))
@_with_model_options
def fit(data_csv, response, fixed, random, model_path, metrics_path, out):
    """Fit a linear mixed model by REML and report it as JSON."""
    spec = _model_spec(response, fixed, random, model_path)
    rows = _load_rows(data_csv, metrics_path)
    result = _fit_or_die(rows, spec)
    inputs = [data_csv] + ([metrics_path] if metrics_path else [])
    _write_json(out, {"model": _model_dict(spec),
                      "fit": fit_to_dict(result),
                      "provenance": _provenance(inputs)})


@main.command()
@click.argument("data_csv", type=click.Path(exists=True))
@_with_model_options
def compare(data_csv, response, fixed, random, model_path, metrics_path,
            out):
    """Fit a mixed model and report all pairwise fixed-level comparisons."""
    spec = _model_spec(response, fixed, random, model_path)
    rows = _load_rows(data_csv, metrics_path)
    result = _fit_or_die(rows, spec)
    inputs = [data_csv] + ([metrics_path] if metrics_path else [])
    _write_json(out, {"model": _model_dict(spec),
                      "fit": fit_to_dict(result),
                      "pairwise": pairwise_to_dict(pairwise(result)),
                      "provenance": _provenance(inputs)})


@main.command()
@click.argument("data_csv", type=click.Path(exists=True))
@_with_model_options
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--n-sims", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--effect", "effect_overrides", multiple=True,
              help="Override a fixed coefficient, name=value (repeatable); "
                   "default: the fitted coefficients.")
def power(data_csv, response, fixed, random, model_path, metrics_path, out,
          alpha, n_sims, seed, effect_overrides):
    """Monte-Carlo power of the omnibus fixed-factor test on this design.

    With no --effect overrides this is observed (post-hoc) power: the
    fitted coefficients and variance components are taken as true.
    """
    spec = _model_spec(response, fixed, random, model_path)
    rows = _load_rows(data_csv, metrics_path)
    result = _fit_or_die(rows, spec)

    effect = list(result.beta)
    names = list(result.beta_names)
    for item in effect_overrides:
        name, _, val = item.partition("=")
        if name not in names:
            _fail(EXIT_VALIDATION,
                  f"--effect name '{name}' is not one of {names}")
        try:
            effect[names.index(name)] = float(val)
        except ValueError:
            _fail(EXIT_VALIDATION, f"--effect '{item}': bad number")

    try:
        pr = power_mc(result.X, result.Z_list, effect,
                      result.var_components, result.sigma2,
                      alpha=alpha, n_sims=n_sims, seed=seed)
    except (ValueError, NonConvergence) as exc:
        code = EXIT_CONVERGENCE if isinstance(exc, NonConvergence) \
            else EXIT_VALIDATION
        _fail(code, str(exc))
    label = None if effect_overrides else "observed power"
    inputs = [data_csv] + ([metrics_path] if metrics_path else [])
    prov = _provenance(inputs, seed=seed)
    _write_json(out, {"model": _model_dict(spec),
                      "effect": {n: float(v) for n, v in zip(names, effect)},
                      "power": power_to_dict(pr, label=label),
                      "provenance": prov})


# --- report ---

FIELD_MODEL = ModelSpec(response="mass_g", fixed_factor="treatment",
                        random_factors=("plant_id", "block_id",
                                        "harvest_date"))

BOXPLOT_TITLES = {
    "mass_g": "Berry mass by group",
    "area_in2": "Front-view area by group",
    "symmetry_pct": "Asymmetry by group",
    "achene_size_px": "Achene size by group",
    "achene_nn_dist_px": "Achene nearest-neighbor distance by group",
}


@main.command()
@click.argument("field_csv", type=click.Path(exists=True))
@click.argument("metrics_csv", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", type=click.Path(), default="report",
              show_default=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--power-sims", type=int, default=0, show_default=True,
              help="Monte-Carlo replicates for the observed-power section "
                   "(0 skips it).")
@click.option("--alpha", type=float, default=0.05, show_default=True)
def report(field_csv, metrics_csv, config_path, out, seed, power_sims,
           alpha):
    """Render the full experiment report: tables, boxplots, provenance."""
    cfg = _load_cfg(config_path)
    try:
        records = attach_metrics(load_field_csv(field_csv),
                                 load_metrics_csv(metrics_csv))
        summaries = summarize(records)
    except DatasetError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = ["# Pollination experiment report", ""]
    lines += ["## Group summaries", "", report_mod.summary_table_md(summaries),
              ""]

    rows = [_field_row_dict(r) for r in records]
    fit_result = None
    fit_error = None
    try:
        design = build_design(rows, FIELD_MODEL)
        fit_result = fit_design(design)
        if not fit_result.converged:
            fit_result, fit_error = None, "model did not converge"
    except (ModelError, BerrymetricsError) as exc:
        fit_error = str(exc)

    lines.append("## Pairwise comparisons")
    lines.append("")
    if fit_result is None:
        lines += [f"*Section skipped: {fit_error}.*", ""]
    else:
        table = pairwise_to_dict(pairwise(fit_result))
        lines += [report_mod.pairwise_table_md(table["rows"]), "",
                  "Tukey-adjusted p-values:", "",
                  report_mod.pairwise_tukey_table_md(table["rows"]), ""]

    lines.append("## Power")
    lines.append("")
    if fit_result is None:
        lines += [f"*Section skipped: {fit_error}.*", ""]
    elif power_sims <= 0:
        lines += ["*Section skipped: power simulation not requested "
                  "(--power-sims 0).*", ""]
    else:
        try:
            pr = power_mc(fit_result.X, fit_result.Z_list, fit_result.beta,
                          fit_result.var_components, fit_result.sigma2,
                          alpha=alpha, n_sims=power_sims, seed=seed)
            lines += [f"Observed power: {pr.power:.2f} "
                      f"(alpha = {pr.alpha:g}, {pr.n_sims} simulations, "
                      f"MC std error {pr.mc_std_error:.4f}, "
                      f"{pr.n_failed} failed refits).", ""]
        except NonConvergence as exc:
            lines += [f"*Section skipped: {exc}.*", ""]

    lines.append("## Boxplots")
    lines.append("")
    for var in SUMMARY_VARIABLES:
        try:
            stats = boxplot_stats(records, var)
        except DatasetError:
            lines += [f"*Boxplot for {var} skipped: no data.*", ""]
            continue
        points = {t: [] for t in Treatment}
        for r in records:
            v = _variable_values(r, var)
            if v is not None:
                points[r.treatment].append(v)
        svg = report_mod.boxplot_svg(
            stats, points, BOXPLOT_TITLES[var],
            report_mod.VARIABLE_LABELS[var])
        svg_name = f"boxplot_{var}.svg"
        (out_dir / svg_name).write_text(svg, encoding="utf-8")
        lines += [f"![{BOXPLOT_TITLES[var]}]({svg_name})", ""]

    prov = _provenance([field_csv, metrics_csv], seed=seed, cfg=cfg)
    prov_flat = {"tool_version": prov["tool_version"], "seed": seed}
    prov_flat.update({f"sha256 {Path(p).name}": h
                      for p, h in prov["inputs"].items()})
    prov_flat["config"] = json.dumps(prov["config"])
    lines += [report_mod.provenance_md(prov_flat), ""]

    (out_dir / "report.md").write_text("\n".join(lines), encoding="utf-8")
    click.echo(f"wrote {out_dir / 'report.md'}")


# --- synth ---

def _build_spec(cls, payload, context):
    known = {f.name for f in dc_fields(cls)}
    unknown = set(payload) - known
    if unknown:
        raise ValueError(f"{context}: unknown keys {sorted(unknown)}")
    return cls(**payload)


def _synth_berries(payload, out_dir, cfg, base_seed):
    items = payload.get("berries")
    if not isinstance(items, list) or not items:
        raise ValueError("'berries' must be a non-empty list of specs")
    outputs = []
    for i, item in enumerate(items):
        item = dict(item)
        berry_id = item.pop("id", f"berry_{i:03d}")
        view = item.pop("view", "front")
        item.setdefault("seed", base_seed + i)
        if "backdrop_color" in item:
            item["backdrop_color"] = tuple(item["backdrop_color"])
        spec = _build_spec(SynthBerrySpec, item, f"berries[{i}]")
        if spec.achene_count > 0 and not (
                cfg.achene_d_min <= spec.achene_diameter_px
                <= cfg.achene_d_max):
            click.echo(f"warning: berries[{i}] achene diameter "
                       f"{spec.achene_diameter_px:g} px is outside the "
                       f"detector range [{cfg.achene_d_min:g}, "
                       f"{cfg.achene_d_max:g}]", err=True)
        image, truth = gen_berry(spec)
        stem = f"{berry_id}_{view}"
        save_png(out_dir / f"{stem}.png", image.pixels)
        mask_rgb = (truth.mask[..., None] * 255).astype("uint8").repeat(
            3, axis=-1)
        save_png(out_dir / f"{stem}_mask.png", mask_rgb)
        sidecar = {
            "berry_id": berry_id, "view": view, "seed": spec.seed,
            "ppi": spec.ppi,
            "axis_angle_deg": truth.axis_angle_deg,
            "area_analytic_in2": truth.area_analytic_in2,
            "area_mask_in2": truth.area_mask_in2,
            "stem_point": list(truth.stem_point),
            "achene_centroids": [list(c) for c in truth.achene_centroids],
            "achene_diameter_px": truth.achene_diameter_px,
            "nn_dist_px": list(truth.nn_dist_px),
        }
        (out_dir / f"{stem}.json").write_text(dumps(sidecar),
                                              encoding="utf-8")
        outputs += [f"{stem}.png", f"{stem}_mask.png", f"{stem}.json"]
    return outputs


def _synth_field(payload, out_dir, base_seed):
    payload = dict(payload)
    payload.setdefault("seed", base_seed)
    if "start_date" in payload:
        payload["start_date"] = datetime.date.fromisoformat(
            payload["start_date"])
    if "effects" in payload:
        payload["effects"] = {Treatment.parse(k): float(v)
                              for k, v in payload["effects"].items()}
    spec = _build_spec(FieldDesignSpec, payload, "field spec")
    records, truth = gen_field_dataset(spec)
    write_field_csv(out_dir / "field.csv", records)
    (out_dir / "truth.json").write_text(dumps(truth), encoding="utf-8")
    return ["field.csv", "truth.json"]


def _synth_lab(payload, out_dir, base_seed):
    payload = dict(payload)
    payload.setdefault("seed", base_seed)
    if "levels" in payload:
        payload["levels"] = tuple(payload["levels"])
    if "effects" in payload:
        payload["effects"] = {
            (k if payload.get("experiment", "height") == "pattern"
             else float(k)): float(v)
            for k, v in payload["effects"].items()}
    spec = _build_spec(LabDesignSpec, payload, "lab spec")
    records, truth = gen_lab_dataset(spec)
    write_lab_csv(out_dir / "lab.csv", records)
    (out_dir / "truth.json").write_text(dumps(truth), encoding="utf-8")
    return ["lab.csv", "truth.json"]


@main.command()
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="synth_out",
              show_default=True, help="Output directory.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Detector config used for range warnings.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Base seed for specs that do not set one.")
def synth(spec_file, out, config_path, seed):
    """Generate a synthetic corpus (berry images or simulated datasets).

    SPEC_FILE is JSON with a "kind" of berries, field, or lab plus the
    matching generator parameters.
    """
    cfg = _load_cfg(config_path)
    try:
        payload = json.loads(Path(spec_file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_VALIDATION, f"spec file: {exc}")
    kind = payload.pop("kind", None)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if kind == "berries":
            outputs = _synth_berries(payload, out_dir, cfg, seed)
        elif kind == "field":
            outputs = _synth_field(payload, out_dir, seed)
        elif kind == "lab":
            outputs = _synth_lab(payload, out_dir, seed)
        else:
            raise ValueError("spec 'kind' must be berries, field, or lab")
    except (ValueError, TypeError, BerrymetricsError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    manifest = {
        "kind": kind,
        "seed": seed,
        "tool_version": __version__,
        "outputs": {name: report_mod.sha256_file(out_dir / name)
                    for name in outputs},
    }
    (out_dir / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    click.echo(f"wrote {len(outputs)} files + manifest.json to {out_dir}")


if __name__ == "__main__":
    main()
