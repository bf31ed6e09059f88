"""Markdown + SVG report rendering."""

import hashlib

from .dataset import SUMMARY_VARIABLES, Treatment

TREATMENT_DISPLAY = {
    Treatment.QUADCOPTER_BEES: "Quadcopter+Bees",
    Treatment.QUADCOPTER: "Quadcopter",
    Treatment.BEES: "Bees",
    Treatment.NEITHER: "Neither",
}

SUMMARY_COLUMNS = [
    ("mass_g", "Mass (g)", "Mass σ"),
    ("area_in2", "Area (in²)", "Area σ"),
    ("symmetry_pct", "Sym. (%)", "Sym. σ"),
    ("achene_size_px", "Achene Size (px)", "Achene Size σ"),
    ("achene_nn_dist_px", "Achene Distance (px)", "Achene Distance σ"),
]

VARIABLE_LABELS = dict(zip(SUMMARY_VARIABLES,
                           [c[1] for c in SUMMARY_COLUMNS]))


def _md_table(header, rows):
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def _num(v, decimals=2):
    return "" if v is None else f"{v:.{decimals}f}"


def summary_table_md(summaries):
    """Markdown table with the Table-I column set."""
    header = ["Group"]
    for _, mean_label, std_label in SUMMARY_COLUMNS:
        header += [mean_label, std_label]
    header.append("# Berries")
    rows = []
    for s in sorted(summaries,
                    key=lambda s: list(Treatment).index(s.treatment)):
        row = [TREATMENT_DISPLAY[s.treatment]]
        for var, _, _ in SUMMARY_COLUMNS:
            mean, std = s.stats.get(var, (None, None))
            row += [_num(mean), _num(std)]
        row.append(str(s.n))
        rows.append(row)
    return _md_table(header, rows)


def _display_level(level):
    try:
        return TREATMENT_DISPLAY[Treatment(level)]
    except ValueError:
        return level


def pairwise_table_md(rows):
    """Markdown table with the Table-II column set (raw p-values)."""
    body = [[_display_level(r["level_a"]), _display_level(r["level_b"]),
             f"{r['p_value']:.4f}"] for r in rows]
    return _md_table(["Group 1", "Group 2", "p-value"], body)


def pairwise_tukey_table_md(rows):
    body = [[_display_level(r["level_a"]), _display_level(r["level_b"]),
             f"{r['p_tukey']:.4f}"] for r in rows]
    return _md_table(["Group 1", "Group 2", "p-value (Tukey-adjusted)"],
                     body)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance_md(provenance):
    lines = ["## Provenance", ""]
    for key, val in provenance.items():
        lines.append(f"- {key}: {val}")
    return "\n".join(lines)


# --- SVG boxplots ---

_W, _H = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 40, 60
_BOX_FRAC = 0.4


def _ticks(lo, hi, n=6):
    span = hi - lo or 1.0
    step = span / (n - 1)
    return [lo + i * step for i in range(n)]


def boxplot_svg(stats_list, points, title, ylabel):
    """One deterministic SVG: a box per treatment with data overlaid.

    points maps treatment -> sequence of raw values.
    """
    groups = sorted(stats_list,
                    key=lambda s: list(Treatment).index(s.treatment))
    all_vals = [v for s in groups for v in (s.minimum, s.maximum)]
    lo, hi = min(all_vals), max(all_vals)
    pad = 0.05 * (hi - lo or 1.0)
    lo, hi = lo - pad, hi + pad
    plot_w = _W - _MARGIN_L - _MARGIN_R
    plot_h = _H - _MARGIN_T - _MARGIN_B

    def sy(v):
        return _MARGIN_T + plot_h * (1 - (v - lo) / (hi - lo))

    k = len(groups)
    slot = plot_w / k
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{_H}" viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" '
           f'font-family="sans-serif" font-size="15">{title}</text>',
           f'<text x="18" y="{_MARGIN_T + plot_h / 2:.1f}" '
           f'text-anchor="middle" font-family="sans-serif" font-size="12" '
           f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.1f})">'
           f'{ylabel}</text>']
    for tick in _ticks(lo, hi):
        y = sy(tick)
        out.append(f'<line x1="{_MARGIN_L}" y1="{y:.1f}" '
                   f'x2="{_W - _MARGIN_R}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{_MARGIN_L - 6}" y="{y + 4:.1f}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{tick:.2f}</text>')
    for i, s in enumerate(groups):
        cx = _MARGIN_L + (i + 0.5) * slot
        half = _BOX_FRAC * slot / 2
        # whiskers
        for v in (s.whisker_lo, s.whisker_hi):
            out.append(f'<line x1="{cx - half / 2:.1f}" y1="{sy(v):.1f}" '
                       f'x2="{cx + half / 2:.1f}" y2="{sy(v):.1f}" '
                       f'stroke="black"/>')
        out.append(f'<line x1="{cx:.1f}" y1="{sy(s.whisker_lo):.1f}" '
                   f'x2="{cx:.1f}" y2="{sy(s.q1):.1f}" stroke="black"/>')
        out.append(f'<line x1="{cx:.1f}" y1="{sy(s.q3):.1f}" '
                   f'x2="{cx:.1f}" y2="{sy(s.whisker_hi):.1f}" '
                   f'stroke="black"/>')
        out.append(f'<rect x="{cx - half:.1f}" y="{sy(s.q3):.1f}" '
                   f'width="{2 * half:.1f}" '
                   f'height="{sy(s.q1) - sy(s.q3):.1f}" fill="#cfe8ff" '
                   f'stroke="black"/>')
        out.append(f'<line x1="{cx - half:.1f}" y1="{sy(s.median):.1f}" '
                   f'x2="{cx + half:.1f}" y2="{sy(s.median):.1f}" '
                   f'stroke="black" stroke-width="2"/>')
        for v in s.outliers:
            out.append(f'<circle cx="{cx:.1f}" cy="{sy(v):.1f}" r="3" '
                       f'fill="none" stroke="black"/>')
        # raw data, deterministic jitter
        vals = points.get(s.treatment, ())
        for j, v in enumerate(vals):
            frac = ((j * 2654435761) % 1000) / 1000.0 - 0.5
            px = cx + frac * half * 1.6
            out.append(f'<circle cx="{px:.1f}" cy="{sy(v):.1f}" r="2" '
                       f'fill="#d9534f" fill-opacity="0.55"/>')
        out.append(f'<text x="{cx:.1f}" y="{_H - _MARGIN_B + 20}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="12">{TREATMENT_DISPLAY[s.treatment]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
