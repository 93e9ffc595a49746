"""Static SVG figures with sibling CSV data files.

Every plotted mark carries its values in ``data-*`` attributes so a figure can
be checked against its CSV without rasterising it.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import pandas as pd

from .errors import EmptyInput
from .model import Subscale

DISCRETE_SUBSCALES = frozenset({Subscale.LandmarkRecognition, Subscale.PathRoute})

WIDTH, HEIGHT, MARGIN = 640, 480, 60
ACTUAL_COLOR, ESTIMATE_COLOR = "#1f77b4", "#ff7f0e"


def _svg(body, width=WIDTH, height=HEIGHT, title=""):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def _scale(lo, hi, out_lo, out_hi):
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return lambda v: out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo), lo, hi


def _axes(x0, y0, x1, y1, xlabel, ylabel):
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{y0 + 40}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="{x0 - 45}" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 {x0 - 45} {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>',
    ]


def scatter_svg(pairs, title="") -> str:
    """Actual (x) against estimated (y) with an identity line and subject labels."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no pairs to plot")
    vals = [v for _, a, e in pairs for v in (a, e)]
    lo, hi = min(vals), max(vals)
    sx, lo, hi = _scale(lo, hi, MARGIN, WIDTH - MARGIN)
    sy, _, _ = _scale(min(vals), max(vals), HEIGHT - MARGIN, MARGIN)
    body = _axes(MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN, "actual", "estimated")
    body.append(f'<line class="identity" x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" '
                f'y2="{sy(hi):.2f}" stroke="gray" stroke-dasharray="4 4"/>')
    for sid, a, e in pairs:
        body.append(f'<circle class="point" cx="{sx(a):.2f}" cy="{sy(e):.2f}" r="4" fill="{ACTUAL_COLOR}" '
                    f'data-subject={quoteattr(str(sid))} data-actual="{a!r}" data-estimated="{e!r}"/>')
        body.append(f'<text class="label" x="{sx(a) + 5:.2f}" y="{sy(e) - 5:.2f}" font-size="10">'
                    f'{escape(str(sid))}</text>')
    return _svg(body, title=title)


def bar_svg(pairs, title="") -> str:
    """Grouped bars (actual, estimated) per subject."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no pairs to plot")
    vals = [v for _, a, e in pairs for v in (a, e)] + [0.0]
    sy, _, _ = _scale(min(vals), max(vals), HEIGHT - MARGIN, MARGIN)
    slot = (WIDTH - 2 * MARGIN) / len(pairs)
    bw = slot * 0.4
    body = _axes(MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN, "participant", "score")
    zero = sy(0.0)
    for k, (sid, a, e) in enumerate(pairs):
        x = MARGIN + k * slot + 0.1 * slot
        for series, val, color, off in (("actual", a, ACTUAL_COLOR, 0.0), ("estimated", e, ESTIMATE_COLOR, bw)):
            top = min(sy(val), zero)
            body.append(f'<rect class="bar" x="{x + off:.2f}" y="{top:.2f}" width="{bw:.2f}" '
                        f'height="{abs(sy(val) - zero):.2f}" fill="{color}" '
                        f'data-subject={quoteattr(str(sid))} data-series="{series}" data-value="{val!r}"/>')
        body.append(f'<text class="label" x="{x + bw:.2f}" y="{HEIGHT - MARGIN + 14}" font-size="9" '
                    f'text-anchor="middle">{escape(str(sid))}</text>')
    return _svg(body, title=title)


def importance_svg(importance: pd.DataFrame, title="Feature importance") -> str:
    """Horizontal grouped bars for every feature with nonzero importance."""
    used = importance[(importance != 0).any(axis=1)]
    if used.empty:
        raise EmptyInput("no nonzero importances to plot")
    models = list(used.columns)
    height = max(HEIGHT, 2 * MARGIN + 14 * len(used) * len(models))
    vmax = float(used.to_numpy().max())
    sx, _, _ = _scale(0.0, vmax, MARGIN + 40, WIDTH - MARGIN)
    row_h = (height - 2 * MARGIN) / len(used)
    bh = row_h / (len(models) + 1)
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
    body = []
    for r, (feat, row) in enumerate(used.iterrows()):
        y = MARGIN + r * row_h
        body.append(f'<text x="{MARGIN + 35}" y="{y + row_h / 2:.2f}" font-size="10" '
                    f'text-anchor="end">{escape(str(feat))}</text>')
        for c, model in enumerate(models):
            val = float(row[model])
            x0 = sx(0.0)
            body.append(f'<rect class="bar" x="{x0:.2f}" y="{y + c * bh:.2f}" width="{max(sx(val) - x0, 0):.2f}" '
                        f'height="{bh:.2f}" fill="{palette[c % len(palette)]}" '
                        f'data-feature={quoteattr(str(feat))} data-model={quoteattr(str(model))} '
                        f'data-value="{val!r}"/>')
    for c, model in enumerate(models):
        body.append(f'<text x="{WIDTH - MARGIN}" y="{40 + 12 * c}" font-size="10" text-anchor="end" '
                    f'fill="{palette[c % len(palette)]}">{escape(str(model))}</text>')
    return _svg(body, height=height, title=title)


def pairs_csv(pairs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "actual", "estimated"])
    for sid, a, e in pairs:
        w.writerow([sid, repr(float(a)), repr(float(e))])
    return buf.getvalue()


def importance_csv(importance: pd.DataFrame) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature"] + list(importance.columns))
    for feat, row in importance.iterrows():
        w.writerow([feat] + [repr(float(v)) for v in row])
    return buf.getvalue()


def subscale_figure(subscale, pairs) -> tuple[str, str]:
    """``(svg, csv)`` for one subscale: bars for discrete subscales, scatter otherwise."""
    subscale = Subscale.parse(subscale) if subscale is not None else None
    title = subscale.value if subscale is not None else "index"
    if subscale in DISCRETE_SUBSCALES:
        svg = bar_svg(pairs, title)
    else:
        svg = scatter_svg(pairs, title)
    return svg, pairs_csv(pairs)


def write_report(out_dir, reports, importance: pd.DataFrame | None = None, writer=None) -> list[Path]:
    """Write one figure per evaluation report plus an optional importance chart.

    ``writer(path, text)`` performs the write (defaults to ``Path.write_text``).
    """
    reports = list(reports)
    if not reports or all(not r.pairs for r in reports):
        raise EmptyInput("no evaluated pairs to report")
    out_dir = Path(out_dir)
    writer = writer or (lambda p, text: Path(p).write_text(text))
    written = []
    for r in reports:
        if not r.pairs:
            raise EmptyInput(f"no pairs for {r.subscale}")
        svg, data = subscale_figure(r.subscale, r.pairs)
        stem = r.subscale.value if r.subscale is not None else "index"
        for suffix, text in ((".svg", svg), (".csv", data)):
            path = out_dir / f"{stem}{suffix}"
            writer(path, text)
            written.append(path)
    if importance is not None:
        for suffix, text in ((".svg", importance_svg(importance)), (".csv", importance_csv(importance))):
            path = out_dir / f"feature_importance{suffix}"
            writer(path, text)
            written.append(path)
    return written
