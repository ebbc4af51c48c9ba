"""Minimal hermetic SVG line plots (no plotting dependencies).

Supports exactly what the figure commands need: polylines, reference circles,
point markers, axes with ticks, a title and a small legend.  Output is plain
text SVG, deterministic for identical input.
"""
from __future__ import annotations

import math

_W, _H = 720, 540
_ML, _MR, _MT, _MB = 70, 20, 40, 50

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"]


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


class SvgPlot:
    """Collects plot elements, then renders to an SVG string."""

    def __init__(self, title: str, xlabel: str = "", ylabel: str = ""):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.lines = []     # (xs, ys, color, label)
        self.circles = []   # (cx, cy, r, color)
        self.markers = []   # (x, y, color, label)
        self._xr = [math.inf, -math.inf]
        self._yr = [math.inf, -math.inf]

    def _grow(self, xs, ys):
        for x in xs:
            if math.isfinite(x):
                self._xr[0] = min(self._xr[0], x)
                self._xr[1] = max(self._xr[1], x)
        for y in ys:
            if math.isfinite(y):
                self._yr[0] = min(self._yr[0], y)
                self._yr[1] = max(self._yr[1], y)

    def line(self, xs, ys, color: str, label: str = ""):
        xs = [float(v) for v in xs]
        ys = [float(v) for v in ys]
        self.lines.append((xs, ys, color, label))
        self._grow(xs, ys)

    def circle(self, cx: float, cy: float, r: float, color: str = "#000000"):
        self.circles.append((float(cx), float(cy), float(r), color))
        self._grow([cx - r, cx + r], [cy - r, cy + r])

    def marker(self, x: float, y: float, color: str, label: str = ""):
        self.markers.append((float(x), float(y), color, label))
        self._grow([x], [y])

    def render(self) -> str:
        xlo, xhi = self._xr
        ylo, yhi = self._yr
        if not math.isfinite(xlo):
            xlo, xhi = 0.0, 1.0
        if not math.isfinite(ylo):
            ylo, yhi = 0.0, 1.0
        if xhi - xlo < 1e-300:
            xhi = xlo + 1.0
        if yhi - ylo < 1e-300:
            yhi = ylo + 1.0
        padx = 0.03 * (xhi - xlo)
        pady = 0.05 * (yhi - ylo)
        xlo -= padx
        xhi += padx
        ylo -= pady
        yhi += pady
        pw = _W - _ML - _MR
        ph = _H - _MT - _MB

        def X(x):
            return _ML + (x - xlo) / (xhi - xlo) * pw

        def Y(y):
            return _MT + (yhi - y) / (yhi - ylo) * ph

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{self.title}</text>',
            f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
            f'stroke="#333" stroke-width="1"/>',
        ]
        for t in _ticks(xlo + padx, xhi - padx):
            if xlo <= t <= xhi:
                px = X(t)
                parts.append(
                    f'<line x1="{px:.2f}" y1="{_MT + ph}" x2="{px:.2f}" '
                    f'y2="{_MT + ph + 5}" stroke="#333"/>'
                )
                parts.append(
                    f'<text x="{px:.2f}" y="{_MT + ph + 18}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
                )
        for t in _ticks(ylo + pady, yhi - pady):
            if ylo <= t <= yhi:
                py = Y(t)
                parts.append(
                    f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" '
                    f'stroke="#333"/>'
                )
                parts.append(
                    f'<text x="{_ML - 8}" y="{py + 4:.2f}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="11">{t:.6g}</text>'
                )
        if self.xlabel:
            parts.append(
                f'<text x="{_ML + pw / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="13">{self.xlabel}</text>'
            )
        if self.ylabel:
            parts.append(
                f'<text x="16" y="{_MT + ph / 2:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="13" '
                f'transform="rotate(-90 16 {_MT + ph / 2:.1f})">{self.ylabel}</text>'
            )
        for xs, ys, color, _ in self.lines:
            pts = " ".join(
                f"{X(x):.2f},{Y(y):.2f}"
                for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y)
            )
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.3"/>'
            )
        for cx, cy, r, color in self.circles:
            rx = abs(X(cx + r) - X(cx))
            ry = abs(Y(cy + r) - Y(cy))
            parts.append(
                f'<ellipse cx="{X(cx):.2f}" cy="{Y(cy):.2f}" rx="{rx:.2f}" '
                f'ry="{ry:.2f}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        for x, y, color, _ in self.markers:
            parts.append(
                f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="4" fill="{color}"/>'
            )
        # legend: labeled lines then labeled markers
        ly = _MT + 14
        for _, _, color, label in self.lines:
            if label:
                parts.append(
                    f'<line x1="{_ML + pw - 150}" y1="{ly}" x2="{_ML + pw - 120}" '
                    f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
                )
                parts.append(
                    f'<text x="{_ML + pw - 114}" y="{ly + 4}" '
                    f'font-family="sans-serif" font-size="12">{label}</text>'
                )
                ly += 16
        for x, y, color, label in self.markers:
            if label:
                parts.append(
                    f'<circle cx="{_ML + pw - 135}" cy="{ly}" r="4" fill="{color}"/>'
                )
                parts.append(
                    f'<text x="{_ML + pw - 114}" y="{ly + 4}" '
                    f'font-family="sans-serif" font-size="12">{label}</text>'
                )
                ly += 16
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
