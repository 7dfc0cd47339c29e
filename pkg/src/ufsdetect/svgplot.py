"""Minimal self-contained SVG line charts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 170, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
DASH = {"solid": "", "dashed": "8,5", "dotted": "2,4"}


@dataclass
class Series:
    name: str
    x: list
    y: list
    lo: list | None = None
    hi: list | None = None
    style: str = "solid"
    markers: bool = True
    color: str | None = None
    extra: dict = field(default_factory=dict)


def _finite(v, log_y):
    return v is not None and math.isfinite(v) and (v > 0 or not log_y)


def _ticks(lo, hi, log_y):
    if log_y:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    span = hi - lo
    raw = span / 5 if span > 0 else 1.0
    step = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if span / (m * step) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt(v):
    return f"{v:.3g}"


def line_chart(series: list[Series], title: str = "", xlabel: str = "", ylabel: str = "", log_y: bool = False) -> str:
    """Renders the series (with optional CI whiskers) as an SVG document string.

    Non-finite points, and non-positive points on a log axis, are skipped.
    """
    xs = [x for s in series for x, y in zip(s.x, s.y) if _finite(y, log_y) and math.isfinite(x)]
    ys = [y for s in series for y in s.y if _finite(y, log_y)]
    for s in series:
        for bound in (s.lo, s.hi):
            if bound:
                ys += [v for v in bound if _finite(v, log_y)]
    if not xs:
        xs = [0.0, 1.0]
    if not ys:
        ys = [1.0]
    tf = (lambda v: math.log10(v)) if log_y else (lambda v: v)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(tf(y) for y in ys), max(tf(y) for y in ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    if log_y:
        y0, y1 = math.floor(y0), math.ceil(y1)
    else:
        pad = 0.05 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + (1 - (tf(y) - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2 - RIGHT / 2:.1f}" y="{TOP - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(x0, x1, False):
        out.append(f'<line x1="{px(t):.2f}" y1="{TOP + ph}" x2="{px(t):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1, log_y):
        if not y0 - 1e-9 <= tf(t) <= y1 + 1e-9:
            continue
        out.append(f'<line x1="{LEFT - 5}" y1="{py(t):.2f}" x2="{LEFT + pw}" y2="{py(t):.2f}" stroke="#dddddd"/>')
        label = f"1e{round(math.log10(t))}" if log_y else _fmt(t)
        out.append(f'<text x="{LEFT - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{label}</text>')

    for i, s in enumerate(series):
        color = s.color or COLORS[i % len(COLORS)]
        dash = DASH.get(s.style, "")
        pts = [(x, y) for x, y in zip(s.x, s.y) if _finite(y, log_y) and math.isfinite(x)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<polyline class="series" data-name="{escape(s.name)}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"{dash_attr} points="{coords}"/>'
        )
        if s.markers:
            for x, y in pts:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        if s.lo and s.hi:
            for x, lo, hi in zip(s.x, s.lo, s.hi):
                if math.isfinite(x) and _finite(lo, log_y) and _finite(hi, log_y):
                    out.append(
                        f'<line class="whisker" x1="{px(x):.2f}" y1="{py(lo):.2f}" x2="{px(x):.2f}" '
                        f'y2="{py(hi):.2f}" stroke="{color}"/>'
                    )
        ly = TOP + 12 + 18 * i
        out.append(
            f'<line x1="{LEFT + pw + 10}" y1="{ly}" x2="{LEFT + pw + 36}" y2="{ly}" stroke="{color}" '
            f'stroke-width="1.8"{dash_attr}/>'
        )
        out.append(f'<text x="{LEFT + pw + 40}" y="{ly + 4}">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
