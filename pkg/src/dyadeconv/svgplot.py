"""Minimal deterministic SVG line plots.

Just axes, polylines, and a legend; CSV files remain the canonical
output, these plots exist so runs are inspectable without a plotting
stack.  All coordinates are formatted with fixed precision so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def line_plot_svg(path, series, *, title: str = "", xlabel: str = "",
                  ylabel: str = "", width: int = 720, height: int = 460) -> None:
    """Write a line plot of one or more (label, x, y) series.

    Parameters
    ----------
    path : path-like
        Output file.
    series : iterable of (label, x, y)
        Arrays per series; dashed style cycles in after the solid palette.
    """
    series = [(str(lab), np.asarray(x, float), np.asarray(y, float))
              for lab, x, y in series]
    if not series:
        raise ValueError("need at least one series")
    x_lo = min(float(np.min(x)) for _, x, _ in series)
    x_hi = max(float(np.max(x)) for _, x, _ in series)
    y_lo = min(float(np.min(y)) for _, _, y in series)
    y_hi = max(float(np.max(y)) for _, _, y in series)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    ml, mr, mt, mb = 64, 16, 34, 46
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + pw * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{width // 2}" y="20" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{title}</text>')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(f'<line x1="{_fmt(px)}" y1="{mt + ph}" x2="{_fmt(px)}" '
                   f'y2="{mt + ph + 5}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(px)}" y="{mt + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{tx:.3g}</text>')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(f'<line x1="{ml - 5}" y1="{_fmt(py)}" x2="{ml}" '
                   f'y2="{_fmt(py)}" stroke="#444"/>')
        out.append(f'<text x="{ml - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{ty:.3g}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw // 2}" y="{height - 8}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{mt + ph // 2}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12" '
                   f'transform="rotate(-90 16 {mt + ph // 2})">{ylabel}</text>')

    for k, (label, x, y) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        dash = ' stroke-dasharray="6 4"' if k >= len(_PALETTE) else ""
        pts = " ".join(f"{_fmt(sx(xi))},{_fmt(sy(yi))}" for xi, yi in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash}/>')
        ly = mt + 16 + 16 * k
        out.append(f'<line x1="{ml + pw - 150}" y1="{ly}" x2="{ml + pw - 120}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{ml + pw - 114}" y="{ly + 4}" '
                   f'font-family="sans-serif" font-size="11">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
