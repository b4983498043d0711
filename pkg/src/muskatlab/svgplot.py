"""Minimal native SVG line plots (no plotting dependency).

Only what the run artifacts need: one axes box, linear or log scales,
polyline series with a small legend.
"""

from __future__ import annotations

import math

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 36, 52


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        step = max(1, (hi_e - lo_e) // 6)
        return [10.0**e for e in range(lo_e, hi_e + 1, step)]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(span):
        out.append(v)
        v += step
    return out


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


class _Scale:
    def __init__(self, lo, hi, px0, px1, log):
        self.log = log
        if log:
            lo = max(lo, 1e-300)
            hi = max(hi, lo * 10)
            self.lo, self.hi = math.log10(lo), math.log10(hi)
        else:
            if hi <= lo:
                hi = lo + 1.0
            self.lo, self.hi = lo, hi
        self.px0, self.px1 = px0, px1

    def __call__(self, v):
        t = math.log10(max(v, 1e-300)) if self.log else v
        frac = (t - self.lo) / (self.hi - self.lo)
        return self.px0 + frac * (self.px1 - self.px0)


def line_plot(
    path,
    series,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    logx: bool = False,
    logy: bool = False,
) -> None:
    """Write a polyline plot; ``series`` is a list of (xs, ys, label)."""
    xs_all = [x for xs, _, _ in series for x in xs]
    ys_all = [y for _, ys, _ in series for y in ys if not (logy and y <= 0)]
    if not xs_all or not ys_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    sx = _Scale(min(xs_all), max(xs_all), _ML, _W - _MR, logx)
    sy = _Scale(min(ys_all), max(ys_all), _H - _MB, _MT, logy)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W-_ML-_MR}" height="{_H-_MT-_MB}" '
        'fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{_W/2}" y="20" text-anchor="middle">{title}</text>')

    lo = 10**sx.lo if logx else sx.lo
    hi = 10**sx.hi if logx else sx.hi
    for tx in _ticks(lo, hi, logx):
        px = sx(tx)
        parts.append(f'<line x1="{px:.1f}" y1="{_H-_MB}" x2="{px:.1f}" y2="{_H-_MB+5}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{_H-_MB+18}" text-anchor="middle">{_fmt(tx)}</text>')
    lo = 10**sy.lo if logy else sy.lo
    hi = 10**sy.hi if logy else sy.hi
    for ty in _ticks(lo, hi, logy):
        py = sy(ty)
        parts.append(f'<line x1="{_ML-5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML-8}" y="{py+4:.1f}" text-anchor="end">{_fmt(ty)}</text>')
    if xlabel:
        parts.append(f'<text x="{_W/2}" y="{_H-14}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(
            f'<text x="16" y="{_H/2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {_H/2})">{ylabel}</text>'
        )

    for i, (xs, ys, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{sx(x):.2f},{sy(y):.2f}"
            for x, y in zip(xs, ys)
            if not (logy and y <= 0) and not (logx and x <= 0)
        )
        if pts:
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * i
        parts.append(f'<line x1="{_W-_MR-120}" y1="{ly-4}" x2="{_W-_MR-96}" y2="{ly-4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_W-_MR-90}" y="{ly}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
