"""Text-grid mode maps and a minimal SVG scatter emitter.

Nothing here is needed for any quantitative result; the CSV outputs carry
all the numbers.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .color import GRID_ROWS, MunsellChart

SYMBOLS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789#$%&*+=?@"


def term_symbols(assignment) -> dict:
    """One character per distinct term, in order of first appearance."""
    out = {}
    for t in np.asarray(assignment).tolist():
        if t not in out:
            out[t] = SYMBOLS[len(out) % len(SYMBOLS)]
    return out


def mode_map_grid(chart: MunsellChart, assignment, symbols: dict | None = None) -> str:
    """Render a mode map on the chart grid.

    Rows come from each chip's row letter and columns from its grid column.
    Column 0 (the achromatic chips) is printed apart from the chromatic
    columns. Cells without a chip are shown as spaces.
    """
    assignment = np.asarray(assignment)
    if len(assignment) != len(chart):
        raise ValueError("assignment length must match the chart")
    symbols = term_symbols(assignment) if symbols is None else symbols
    cells = {(c.grid_row, c.grid_col): symbols[a] for c, a in zip(chart.chips, assignment.tolist())}
    rows = [r for r in GRID_ROWS if any(k[0] == r for k in cells)]
    rows += sorted({k[0] for k in cells} - set(rows))
    cols = sorted({k[1] for k in cells if k[1] != 0})
    lines = ["    0 | " + "".join(str(c // 10) if c % 10 == 0 else " " for c in cols)]
    for r in rows:
        achrom = cells.get((r, 0), " ")
        lines.append(f"{r:>2}  {achrom} | " + "".join(cells.get((r, c), " ") for c in cols))
    return "\n".join(lines) + "\n"


def svg_scatter(series, frontier=None, path=None, width=480, height=360, title="",
                xlabel="complexity (nats)", ylabel="accuracy (nats)") -> str:
    """Scatter plot of named point sets with an optional frontier polyline.

    ``series`` is a list of ``(name, xs, ys, style)`` where ``style`` may set
    ``color``, ``marker`` ("circle" or "square") and ``size``.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    xs_all = [np.asarray(s[1], float) for s in series]
    ys_all = [np.asarray(s[2], float) for s in series]
    if frontier is not None:
        xs_all.append(np.asarray(frontier[0], float))
        ys_all.append(np.asarray(frontier[1], float))
    xs = np.concatenate(xs_all) if xs_all else np.zeros(1)
    ys = np.concatenate(ys_all) if ys_all else np.zeros(1)
    xmax = float(np.nanmax(xs)) * 1.05 or 1.0
    ymax = float(np.nanmax(ys)) * 1.05 or 1.0
    m = 50
    sx = lambda x: m + (width - 2 * m) * x / xmax
    sy = lambda y: height - m - (height - 2 * m) * y / ymax

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
           f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {height / 2})">{escape(ylabel)}</text>']
    if title:
        out.append(f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>')
    if frontier is not None:
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(*frontier))
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    for i, (name, px, py, style) in enumerate(series):
        style = style or {}
        color = style.get("color", colors[i % len(colors)])
        size = style.get("size", 2.5)
        for x, y in zip(np.asarray(px, float), np.asarray(py, float)):
            if style.get("marker") == "square":
                out.append(f'<rect x="{sx(x) - size:.2f}" y="{sy(y) - size:.2f}" width="{2 * size}" '
                           f'height="{2 * size}" fill="{color}"/>')
            else:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="{size}" fill="{color}" '
                           'fill-opacity="0.7"/>')
        out.append(f'<text x="{width - m - 90}" y="{m + 14 * i}" font-size="11" fill="{color}">'
                   f'{escape(name)}</text>')
    out.append("</svg>\n")
    svg = "\n".join(out)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(svg)
    return svg
