"""Minimal self-contained SVG charts (bar chart and scatter with a y = x line)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd")


def _f(v: float) -> str:
    return f"{v:.2f}"


class Canvas:
    def __init__(self, width: int, height: int, title: str):
        self.width = width
        self.height = height
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f"<title>{escape(title)}</title>",
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        ]

    def rect(self, x, y, w, h, fill, title=None):
        if title is None:
            self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>')
        else:
            self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
                              f'fill="{fill}"><title>{escape(title)}</title></rect>')

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0, extra=""):
        self.parts.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                          f'stroke="{stroke}" stroke-width="{width}"{extra}/>')

    def circle(self, x, y, r, fill, title=None):
        body = f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{fill}" fill-opacity="0.7"'
        self.parts.append(body + "/>" if title is None else body + f"><title>{escape(title)}</title></circle>")

    def text(self, x, y, s, anchor="start", size=None, rotate=None, cls=None):
        attrs = f'x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}"'
        if size:
            attrs += f' font-size="{size}"'
        if rotate is not None:
            attrs += f' transform="rotate({rotate} {_f(x)} {_f(y)})"'
        if cls:
            attrs += f" class={quoteattr(cls)}"
        self.parts.append(f"<text {attrs}>{escape(str(s))}</text>")

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    # the outer ticks enclose [lo, hi]; charts use them as axis limits
    first = math.floor(lo / step + 1e-9)
    last = math.ceil(hi / step - 1e-9)
    return [round(k * step, 10) for k in range(first, last + 1)]


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


class _Frame:
    """Plot area with linear axes."""

    def __init__(self, canvas, left, top, right, bottom, xlim, ylim):
        self.c = canvas
        self.left, self.top, self.right, self.bottom = left, top, right, bottom
        self.xlim, self.ylim = xlim, ylim

    def x(self, v):
        lo, hi = self.xlim
        return self.left + (v - lo) / (hi - lo) * (self.right - self.left)

    def y(self, v):
        lo, hi = self.ylim
        return self.bottom - (v - lo) / (hi - lo) * (self.bottom - self.top)

    def axes(self, xlabel, ylabel, xticks=None, yticks=None):
        c = self.c
        c.line(self.left, self.bottom, self.right, self.bottom, "#333")
        c.line(self.left, self.top, self.left, self.bottom, "#333")
        for t in yticks or []:
            y = self.y(t)
            c.line(self.left, y, self.right, y, "#ddd", 0.5)
            c.line(self.left - 4, y, self.left, y, "#333")
            c.text(self.left - 6, y + 4, _tick_label(t), anchor="end")
        for t in xticks or []:
            x = self.x(t)
            c.line(x, self.bottom, x, self.bottom + 4, "#333")
            c.text(x, self.bottom + 16, _tick_label(t), anchor="middle")
        c.text((self.left + self.right) / 2, c.height - 8, xlabel, anchor="middle")
        c.text(14, (self.top + self.bottom) / 2, ylabel, anchor="middle", rotate=-90)


def bar_chart(categories: list[str], series: dict[str, list[float]], title: str, ylabel: str) -> str:
    """Grouped vertical bars, one group per category label."""
    n = max(len(categories), 1)
    group_w = 14 * max(len(series), 1) + 10
    width = max(480, 80 + n * group_w + 140)
    height = 360
    c = Canvas(width, height, title)
    c.text(width / 2, 20, title, anchor="middle", size=14)
    ymax = max([v for vals in series.values() for v in vals] + [0.0])
    ticks = nice_ticks(0.0, ymax if ymax > 0 else 1.0)
    fr = _Frame(c, 60, 40, width - 140, height - 70, (0, n), (0, ticks[-1]))
    fr.axes("", ylabel, yticks=ticks)
    bar_w = (group_w - 10) / max(len(series), 1)
    for i, cat in enumerate(categories):
        gx = fr.x(i) + ((fr.right - fr.left) / n - group_w) / 2 + 5
        for k, (name, vals) in enumerate(series.items()):
            v = vals[i]
            c.rect(gx + k * bar_w, fr.y(v), bar_w - 1, fr.y(0) - fr.y(v), PALETTE[k % len(PALETTE)],
                   title=f"{cat} {name}: {v:.6g}")
        c.text(fr.x(i + 0.5), fr.bottom + 14, cat, anchor="end", rotate=-45)
    for k, name in enumerate(series):
        ly = 50 + 18 * k
        c.rect(width - 125, ly - 9, 10, 10, PALETTE[k % len(PALETTE)])
        c.text(width - 110, ly, name)
    return c.render()


def scatter_identity(points: list[tuple[float, float]], title: str, xlabel: str, ylabel: str,
                     labels: list[str] | None = None) -> str:
    """Scatter plot with the reference line y = x drawn in black."""
    width, height = 480, 480
    c = Canvas(width, height, title)
    c.text(width / 2, 20, title, anchor="middle", size=14)
    vals = [v for p in points for v in p] or [0.0, 1.0]
    lo, hi = min(vals), max(vals)
    pad = (hi - lo) * 0.05 or 1.0
    ticks = nice_ticks(lo - pad, hi + pad)
    lim = (ticks[0], ticks[-1])
    fr = _Frame(c, 60, 40, width - 30, height - 60, lim, lim)
    fr.axes(xlabel, ylabel, xticks=ticks, yticks=ticks)
    c.line(fr.x(lim[0]), fr.y(lim[0]), fr.x(lim[1]), fr.y(lim[1]), "black", 1.5, ' class="identity"')
    for i, (a, b) in enumerate(points):
        tip = f"{labels[i]}: " if labels else ""
        c.circle(fr.x(a), fr.y(b), 3, PALETTE[0], title=f"{tip}({a:.6g}, {b:.6g})")
    c.text(fr.right - 4, fr.top + 12, "y = x", anchor="end")
    return c.render()
