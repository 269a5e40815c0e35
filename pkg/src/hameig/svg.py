"""Minimal SVG line plots, written directly (no plotting dependency).

Canvas: ``viewBox="0 0 800 600"``.  The plot area is the rectangle
x in [80, 770], y in [30, 540].  Data x is mapped linearly from
[xmin, xmax] to [80, 770]; data y from [ymin, ymax] to [540, 30]
(SVG y grows downward, so larger values sit higher).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Series", "line_plot", "WIDTH", "HEIGHT", "PLOT_BOX"]

WIDTH, HEIGHT = 800, 600
PLOT_BOX = (80.0, 30.0, 770.0, 540.0)  # left, top, right, bottom
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    markers: bool = False
    dashed: bool = False
    colour: str | None = None
    extra: dict = field(default_factory=dict)


def _range(values, pad=0.05):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    d = (hi - lo) * pad
    return lo - d, hi + d


def _mapper(xr, yr):
    left, top, right, bottom = PLOT_BOX

    def px(x):
        return left + (np.asarray(x, dtype=float) - xr[0]) / (xr[1] - xr[0]) * (right - left)

    def py(y):
        return bottom - (np.asarray(y, dtype=float) - yr[0]) / (yr[1] - yr[0]) * (bottom - top)

    return px, py


def line_plot(series, title="", xlabel="", ylabel="", hlines=(), vlines=()) -> str:
    """Render series (and optional horizontal/vertical reference lines) as SVG text."""
    series = [s for s in series if np.size(s.x)]
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series] + [np.asarray(vlines, dtype=float)])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series] + [np.asarray(hlines, dtype=float)])
    finite = np.isfinite(ys)
    xr, yr = _range(xs), _range(ys[finite] if np.any(finite) else np.zeros(1))
    px, py = _mapper(xr, yr)
    left, top, right, bottom = PLOT_BOX
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="black"/>',
    ]
    for k in range(6):
        xv = xr[0] + (xr[1] - xr[0]) * k / 5
        yv = yr[0] + (yr[1] - yr[0]) * k / 5
        X, Y = float(px(xv)), float(py(yv))
        out.append(f'<line x1="{X:.2f}" y1="{bottom}" x2="{X:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{bottom + 20}" font-size="12" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" font-size="12" text-anchor="end">{yv:.4g}</text>')
    for h in hlines:
        Y = float(py(h))
        out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{right}" y2="{Y:.2f}" stroke="gray" stroke-dasharray="6,4"/>')
    for v in vlines:
        X = float(px(v))
        out.append(f'<line x1="{X:.2f}" y1="{top}" x2="{X:.2f}" y2="{bottom}" stroke="gray" stroke-dasharray="2,3"/>')
    for i, s in enumerate(series):
        colour = s.colour or COLOURS[i % len(COLOURS)]
        x, y = np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)
        ok = np.isfinite(y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x[ok]), py(y[ok])))
        dash = ' stroke-dasharray="8,4"' if s.dashed else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{pts}"/>')
        if s.markers:
            for a, b in zip(px(x[ok]), py(y[ok])):
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{colour}"/>')
        if s.label:
            out.append(f'<text x="{right - 10}" y="{top + 18 + 16 * i}" font-size="13" text-anchor="end" fill="{colour}">{escape(s.label)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="20" font-size="15" text-anchor="middle">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{(left + right) / 2}" y="{HEIGHT - 15}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="20" y="{(top + bottom) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {(top + bottom) / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
