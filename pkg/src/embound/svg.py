"""Minimal, deterministic SVG output for loss curves and boundary overlays."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v):
    return f"{v:.2f}"


def _head(width, height, prov):
    meta = " ".join(f"{k}={v}" for k, v in sorted((prov or {}).items()))
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- {escape(meta)} -->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def line_plot(series, title="", xlabel="", ylabel="", logy=False, prov=None, width=640, height=400):
    """``series`` is a list of (label, xs, ys); NaN points break nothing, they are skipped."""
    left, right, top, bottom = 70, 150, 30, 50
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy):
                pts.append((x, math.log10(y) if logy else y))
    if not pts:
        raise ValueError("nothing to plot")
    xa, ya = np.array(pts).T
    x0, x1 = float(xa.min()), float(xa.max())
    y0, y1 = float(ya.min()), float(ya.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = _head(width, height, prov)
    out.append(f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(sx(t))}" y="{top + ph + 16}" text-anchor="middle" font-size="10">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        label = f"{10 ** t:.3g}" if logy else f"{t:.4g}"
        out.append(f'<text x="{left - 6}" y="{_fmt(sy(t) + 3)}" text-anchor="end" font-size="10">{label}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{top + ph / 2}" font-size="12" transform="rotate(-90 14 {top + ph / 2})" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(series):
        colour = PALETTE[k % len(PALETTE)]
        coords = [
            f"{_fmt(sx(x))},{_fmt(sy(math.log10(y) if logy else y))}"
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y) and (y > 0 or not logy)
        ]
        if coords:
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{" ".join(coords)}"/>')
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{width - right + 10}" y1="{ly}" x2="{width - right + 30}" y2="{ly}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{width - right + 34}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def overlay(curves, markers=None, title="", prov=None, size=480, pad=10.0):
    """Closed curves (label, points) plus optional marker points, in mm with y up."""
    allpts = [np.asarray(p) for _, p in curves] + ([np.asarray(markers)] if markers is not None else [])
    stack = np.vstack(allpts)
    lo = stack.min(axis=0) - pad
    span = float((stack.max(axis=0) + pad - lo).max())
    scale = (size - 40) / span

    def tx(p):
        return 20 + (p[0] - lo[0]) * scale, size - 20 - (p[1] - lo[1]) * scale

    out = _head(size + 160, size, prov)
    out.append(f'<text x="{size / 2}" y="14" text-anchor="middle" font-size="13">{escape(title)}</text>')
    for k, (label, pts) in enumerate(curves):
        colour = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(tx, np.asarray(pts)))
        out.append(f'<polygon fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{size + 10}" y="{30 + 16 * k}" font-size="11" fill="{colour}">{escape(label)}</text>')
    if markers is not None:
        for x, y in map(tx, np.asarray(markers)):
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
