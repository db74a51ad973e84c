"""Standalone SVG line plots: one or more polylines, axes, ticks, labels.

Kept dependency-free on purpose; the output opens in any browser.
"""
from __future__ import annotations

from html import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=50)
COLORS = ("#1f5fa8", "#c0392b", "#27864a", "#7d3c98", "#b9770e")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise ValueError("plot range must be finite")
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10.0 ** np.floor(np.log10(raw))
    step = mag * min((1, 2, 5, 10), key=lambda s: abs(s * mag - raw))
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


def _fmt(v: float) -> str:
    return f"{v:.3g}" if v != 0 else "0"


def polyline_svg(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """``series`` is a list of ``(label, x, y)`` triples."""
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, _, y in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(min(ys.min(), 0.0)), float(max(ys.max(), 0.0))
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(x):
        return L + (np.asarray(x) - x0) / (x1 - x0) * (R - L)

    def py(y):
        return B - (np.asarray(y) - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{L}" y1="{B}" x2="{R}" y2="{B}" stroke="black"/>',
        f'<line x1="{L}" y1="{T}" x2="{L}" y2="{B}" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        if x0 <= t <= x1:
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{B}" x2="{X:.2f}" y2="{B + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{B + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(y0, y1):
        if y0 <= t <= y1:
            Y = py(t)
            out.append(f'<line x1="{L - 5}" y1="{Y:.2f}" x2="{L}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{L - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{L}" y1="{py(0):.2f}" x2="{R}" y2="{py(0):.2f}" stroke="#999" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{(T + B) / 2}" text-anchor="middle" transform="rotate(-90 16 {(T + B) / 2})">'
        f"{escape(ylabel)}</text>"
    )
    for i, (label, x, y) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{R - 5}" y="{T + 14 * (i + 1)}" text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(polyline_svg(series, **kw))
