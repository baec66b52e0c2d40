"""Static SVG line plots derived from CSV tables.

Deliberately minimal: polylines over a fixed canvas with min/max axis labels.
Plots are derived artifacts; nothing downstream depends on them.
"""

from __future__ import annotations

import math
from pathlib import Path

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_WIDTH, _HEIGHT, _MARGIN = 640, 400, 50


def svg_line_plot(header, rows, x_col: str, y_cols, path: str | Path, title: str = "") -> None:
    """Write a polyline plot of the named numeric columns to ``path``."""
    idx = {name: i for i, name in enumerate(header)}
    for name in (x_col, *y_cols):
        if name not in idx:
            raise ValueError(f"column {name!r} not in table header")

    def column(name: str) -> list[float]:
        return [float(r[idx[name]]) for r in rows]

    xs = column(x_col)
    series = {name: column(name) for name in y_cols}
    finite = [v for vals in series.values() for v in vals if math.isfinite(v)]
    if not xs or not finite:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(finite), max(finite)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x: float) -> float:
        return _MARGIN + (x - x_lo) / x_span * (_WIDTH - 2 * _MARGIN)

    def py(y: float) -> float:
        return _HEIGHT - _MARGIN - (y - y_lo) / y_span * (_HEIGHT - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" '
        f'stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )
    for k, (name, vals) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        points = " ".join(
            f"{px(x):.2f},{py(v):.2f}" for x, v in zip(xs, vals) if math.isfinite(v)
        )
        parts.append(f'<polyline fill="none" stroke="{color}" points="{points}"/>')
        parts.append(
            f'<text x="{_WIDTH - _MARGIN + 4}" y="{_MARGIN + 14 * k}" font-size="11" '
            f'fill="{color}">{name}</text>'
        )
    for value, x, y, anchor in (
        (x_lo, _MARGIN, _HEIGHT - _MARGIN + 16, "middle"),
        (x_hi, _WIDTH - _MARGIN, _HEIGHT - _MARGIN + 16, "middle"),
        (y_lo, _MARGIN - 4, _HEIGHT - _MARGIN, "end"),
        (y_hi, _MARGIN - 4, _MARGIN + 4, "end"),
    ):
        parts.append(
            f'<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{value:.4g}</text>'
        )
    parts.append(f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 8}" text-anchor="middle" '
                 f'font-size="12">{x_col}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
