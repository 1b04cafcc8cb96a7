"""Minimal hand-written SVG figures: line plots, an outcome strip, a heatmap."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 400
PAD = 56
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
OUTCOME_COLOURS = {"ConvergedToOrigin": "#2ca02c", "NegativityDetected": "#d62728",
                   "ExitedRegion": "#ff7f0e", "Stalled": "#7f7f7f"}


def _fmt(x):
    return f"{x:.2f}"


def _range(vals):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = 0.0, 1.0
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _frame(title, xlabel, ylabel, xr, yr):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{PAD}" y="{PAD // 2}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" '
           'fill="none" stroke="black"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
           f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {H / 2})">{escape(ylabel)}</text>']
    for k in range(5):
        fx = k / 4
        x = PAD + fx * (W - 2 * PAD)
        y = H - 1.5 * PAD - fx * (H - 2 * PAD)
        out.append(f'<text x="{_fmt(x)}" y="{H - 1.5 * PAD + 16}" text-anchor="middle" '
                   f'font-size="10">{xr[0] + fx * (xr[1] - xr[0]):.4g}</text>')
        out.append(f'<text x="{PAD - 4}" y="{_fmt(y + 3)}" text-anchor="end" '
                   f'font-size="10">{yr[0] + fx * (yr[1] - yr[0]):.4g}</text>')
    return out


def _mapper(xr, yr):
    def m(x, y):
        px = PAD + (x - xr[0]) / (xr[1] - xr[0]) * (W - 2 * PAD)
        py = H - 1.5 * PAD - (y - yr[0]) / (yr[1] - yr[0]) * (H - 2 * PAD)
        return px, py
    return m


def line_plot(series, title="", xlabel="", ylabel="", max_points=1500) -> str:
    """``series`` is a list of ``(label, x, y)``."""
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    xr, yr = _range(xs), _range(ys)
    m = _mapper(xr, yr)
    out = _frame(title, xlabel, ylabel, xr, yr)
    for k, (label, x, y) in enumerate(series):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        step = max(1, x.size // max_points)
        pts = " ".join("{},{}".format(*map(_fmt, m(a, b))) for a, b in zip(x[::step], y[::step]))
        col = COLOURS[k % len(COLOURS)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{W - PAD - 4}" y="{PAD // 2 + 16 + 14 * k}" text-anchor="end" '
                   f'font-size="11" fill="{col}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def outcome_strip(points, c_star=None, title="shooting outcome vs speed") -> str:
    """``points`` is a list of ``(c, outcome kind)``; one coloured tick per shot."""
    cs = [c for c, _ in points] + ([c_star] if c_star is not None else [])
    xr = _range(cs)
    m = _mapper(xr, (0.0, 1.0))
    out = _frame(title, "c", "", xr, (0.0, 1.0))
    for c, kind in points:
        x, _ = m(c, 0)
        col = OUTCOME_COLOURS.get(kind, "black")
        out.append(f'<line x1="{_fmt(x)}" y1="{PAD}" x2="{_fmt(x)}" y2="{H - 2 * PAD}" '
                   f'stroke="{col}" stroke-width="2"/>')
    if c_star is not None:
        x, _ = m(c_star, 0)
        out.append(f'<line x1="{_fmt(x)}" y1="{PAD // 2}" x2="{_fmt(x)}" y2="{H - 1.5 * PAD}" '
                   'stroke="black" stroke-dasharray="4 3"/>')
    for k, (kind, col) in enumerate(OUTCOME_COLOURS.items()):
        out.append(f'<text x="{PAD + 6}" y="{PAD // 2 + 16 + 14 * k}" font-size="11" '
                   f'fill="{col}">{kind}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap(values, row_labels, title="") -> str:
    """One cell per row value, shaded from white (0) to red (max)."""
    vals = np.asarray(values, dtype=float)
    n = max(1, vals.size)
    top = float(np.nanmax(vals)) if vals.size and np.any(np.isfinite(vals)) else 1.0
    top = top if top > 0 else 1.0
    cell = (H - 2 * PAD) / n
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">', f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for k, (v, lab) in enumerate(zip(vals.tolist(), row_labels)):
        f = 0.0 if not math.isfinite(v) else min(1.0, max(0.0, v / top))
        g = int(round(255 * (1 - f)))
        fill = f"rgb(255,{g},{g})" if math.isfinite(v) else "rgb(200,200,200)"
        y = PAD + k * cell
        out.append(f'<rect x="{W // 2}" y="{_fmt(y)}" width="{W // 2 - PAD}" height="{_fmt(cell)}" '
                   f'fill="{fill}" stroke="#ccc"/>')
        out.append(f'<text x="{W // 2 - 6}" y="{_fmt(y + cell / 2 + 3)}" text-anchor="end" '
                   f'font-size="{max(6, min(11, int(cell)))}">{escape(lab)}</text>')
    out.append(f'<text x="{W - PAD}" y="{H - 10}" text-anchor="end" font-size="10">'
               f'max = {top:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
