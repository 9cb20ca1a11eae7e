"""Minimal static SVG line plots.

The runner emits figures as plain SVG polylines so results can be viewed
anywhere without a plotting stack.  Coordinates are formatted with fixed
precision, keeping the files byte-reproducible for identical inputs.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["line_plot_svg"]

_WIDTH, _HEIGHT = 720, 460
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 34, 46
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


def line_plot_svg(
    path: str,
    x: np.ndarray,
    curves: list[tuple[str, np.ndarray]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write one figure with a shared x axis and labelled curves."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in curves]
    finite = [y[np.isfinite(y)] for y in ys]
    y_all = np.concatenate([f for f in finite if f.size] or [np.zeros(1)])
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]

    axis_style = 'stroke="#444444" stroke-width="1"'
    text_style = 'font-family="sans-serif" font-size="11" fill="#444444"'
    x_axis_y = _HEIGHT - _MARGIN_B
    parts.append(f'<line x1="{_MARGIN_L}" y1="{x_axis_y}" x2="{_WIDTH - _MARGIN_R}" y2="{x_axis_y}" {axis_style}/>')
    parts.append(f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" y2="{x_axis_y}" {axis_style}/>')

    for tick in _nice_ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(f'<line x1="{px:.2f}" y1="{x_axis_y}" x2="{px:.2f}" y2="{x_axis_y + 5}" {axis_style}/>')
        parts.append(f'<text x="{px:.2f}" y="{x_axis_y + 18}" text-anchor="middle" {text_style}>{tick:.6g}</text>')
    for tick in _nice_ticks(y_lo, y_hi):
        py = sy(tick)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{py:.2f}" x2="{_MARGIN_L}" y2="{py:.2f}" {axis_style}/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end" {text_style}>{tick:.6g}</text>')

    if xlabel:
        parts.append(
            f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 10}" '
            f'text-anchor="middle" {text_style}>{xlabel}</text>'
        )
    if ylabel:
        cy = _MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="16" y="{cy:.1f}" text-anchor="middle" {text_style} '
            f'transform="rotate(-90 16 {cy:.1f})">{ylabel}</text>'
        )

    for idx, ((label, _), y) in enumerate(zip(curves, ys)):
        color = _COLORS[idx % len(_COLORS)]
        points = " ".join(
            f"{sx(xv):.2f},{sy(yv):.2f}"
            for xv, yv in zip(x, y)
            if np.isfinite(yv)
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        ly = _MARGIN_T + 14 + 16 * idx
        lx = _WIDTH - _MARGIN_R - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" {text_style}>{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
