"""CSV and SVG rendering for accuracy/gap curves and density tables.

SVG charts are generated directly (polylines plus axis ticks); CSV is the
canonical data export. All numeric formatting is fixed so report bytes are
reproducible.
"""

from __future__ import annotations

import csv
import io as _io

from .analysis import DensityReport, fmt_sci
from .errors import DataError
from .io import atomic_write_text
from .probing import CurveSeries, ema_smooth

_WIDTH, _HEIGHT = 640, 400
_MARGIN = 55

_SERIES_COLORS = {
    "bridge": "#1f77b4",
    "no_bridge": "#ff7f0e",
    "gap": "#2ca02c",
}


def curves_csv(bridge: CurveSeries, no_bridge: CurveSeries, gap: CurveSeries) -> str:
    """Rows of (step, acc_bridge, acc_no_bridge, gap) on the gap's grid."""
    b = dict(zip(bridge.steps, bridge.values))
    n = dict(zip(no_bridge.steps, no_bridge.values))
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "acc_bridge", "acc_no_bridge", "gap"])
    for step, g in zip(gap.steps, gap.values):
        writer.writerow([step, repr(b[step]), repr(n[step]), repr(g)])
    return buf.getvalue()


def _scale(points, x_range, y_range):
    x_lo, x_hi = x_range
    y_lo, y_hi = y_range
    x_span = (x_hi - x_lo) or 1
    y_span = (y_hi - y_lo) or 1
    out = []
    for x, y in points:
        px = _MARGIN + (x - x_lo) / x_span * (_WIDTH - 2 * _MARGIN)
        py = _HEIGHT - _MARGIN - (y - y_lo) / y_span * (_HEIGHT - 2 * _MARGIN)
        out.append((px, py))
    return out


def _polyline(points, color: str, width: float, dashed: bool = False, opacity: float = 1.0) -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
        f' opacity="{opacity:.2f}"{dash} points="{coords}"/>'
    )


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = (hi - lo) or 1
    return [lo + span * i / (count - 1) for i in range(count)]


def line_chart_svg(series: dict[str, CurveSeries], title: str, y_label: str,
                   smooth_weight: float | None = None) -> str:
    """One chart with a raw (faint) and optionally EMA-smoothed (bold) line
    per named series."""
    if not series:
        raise DataError("no series to chart")
    all_steps = sorted({s for cs in series.values() for s in cs.steps})
    all_values = [v for cs in series.values() for v in cs.values]
    if smooth_weight is not None:
        for cs in series.values():
            all_values.extend(ema_smooth(cs, smooth_weight).values)
    x_range = (min(all_steps), max(all_steps))
    y_lo, y_hi = min(all_values), max(all_values)
    pad = (y_hi - y_lo) * 0.05 or 0.05
    y_range = (y_lo - pad, y_hi + pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]
    # axes
    x0, y0 = _MARGIN, _HEIGHT - _MARGIN
    x1, y1 = _WIDTH - _MARGIN, _MARGIN
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tx in _ticks(*x_range):
        (px, _), = _scale([(tx, y_range[0])], x_range, y_range)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{px:.2f}" y="{y0 + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tx:.0f}</text>'
        )
    for ty in _ticks(*y_range):
        (_, py), = _scale([(x_range[0], ty)], x_range, y_range)
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 9}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:.2f}</text>'
        )
    parts.append(
        f'<text x="16" y="{_HEIGHT / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {_HEIGHT / 2:.0f})">{y_label}</text>'
    )
    parts.append(
        f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">checkpoint step</text>'
    )

    legend_y = _MARGIN + 4
    for name in sorted(series):
        cs = series[name]
        color = _SERIES_COLORS.get(name, "#555555")
        raw_points = _scale(cs.points(), x_range, y_range)
        if smooth_weight is not None:
            parts.append(_polyline(raw_points, color, 1.0, opacity=0.35))
            smoothed = ema_smooth(cs, smooth_weight)
            parts.append(_polyline(_scale(smoothed.points(), x_range, y_range), color, 2.2))
        else:
            parts.append(_polyline(raw_points, color, 2.0))
        parts.append(
            f'<rect x="{x1 - 150}" y="{legend_y - 9}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x1 - 133}" y="{legend_y + 2}" font-family="sans-serif" '
            f'font-size="12">{name}</text>'
        )
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def density_table_csv(reports: list[DensityReport]) -> str:
    """Table mirroring a culture-by-corpus density layout: one row per
    culture, one column per corpus label."""
    if not reports:
        raise DataError("no density reports to tabulate")
    labels = sorted({r.corpus_label for r in reports})
    cultures = sorted({r.culture for r in reports})
    by_key = {(r.culture, r.corpus_label): r for r in reports}
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["culture"] + [f"{lbl}_density" for lbl in labels])
    for culture in cultures:
        row = [culture]
        for lbl in labels:
            rep = by_key.get((culture, lbl))
            row.append(fmt_sci(rep.density) if rep else "")
        writer.writerow(row)
    return buf.getvalue()


def write_text(path, text: str):
    return atomic_write_text(path, text)
