"""Minimal deterministic SVG figures for the benchmark outputs."""

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=150, top=30, bottom=60)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _f(x):
    return f"{x:.2f}"


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw))
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    return [start + k * step for k in range(int(round((stop - start) / step)) + 1)]


class _Frame:
    def __init__(self, xlim, ylim):
        self.xt = _ticks(*xlim)
        self.yt = _ticks(*ylim)
        self.x0, self.x1 = self.xt[0], self.xt[-1]
        self.y0, self.y1 = self.yt[0], self.yt[-1]
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN["top"] + (1 - (y - self.y0) / (self.y1 - self.y0)) * self.ph

    def axes(self, xlabel, ylabel, title):
        out = []
        left, top = MARGIN["left"], MARGIN["top"]
        bottom = top + self.ph
        out.append(f'<rect x="{left}" y="{top}" width="{self.pw}" '
                   f'height="{self.ph}" fill="none" stroke="black"/>')
        for x in self.xt:
            X = _f(self.px(x))
            out.append(f'<line x1="{X}" y1="{bottom}" x2="{X}" '
                       f'y2="{bottom + 5}" stroke="black"/>')
            out.append(f'<text x="{X}" y="{bottom + 20}" '
                       f'text-anchor="middle">{x:g}</text>')
        for y in self.yt:
            Y = _f(self.py(y))
            out.append(f'<line x1="{left - 5}" y1="{Y}" x2="{left}" '
                       f'y2="{Y}" stroke="black"/>')
            out.append(f'<text x="{left - 8}" y="{Y}" text-anchor="end" '
                       f'dominant-baseline="middle">{y:g}</text>')
        out.append(f'<text x="{_f(left + self.pw / 2)}" y="{HEIGHT - 15}" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="18" y="{_f(top + self.ph / 2)}" '
                   f'text-anchor="middle" transform="rotate(-90 18 '
                   f'{_f(top + self.ph / 2)})">{escape(ylabel)}</text>')
        out.append(f'<text x="{_f(left + self.pw / 2)}" y="20" '
                   f'text-anchor="middle">{escape(title)}</text>')
        return out


def _document(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" '
            'font-family="sans-serif" font-size="12">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def line_svg(rows):
    """Mean Amari distance against delay level, one polyline per algorithm.

    ``rows`` need ``delay_level``, ``algorithm`` and ``amari_mean``; rows
    sharing a (level, algorithm) pair are averaged and NaNs are skipped.
    """
    series = {}
    for r in rows:
        v = float(r["amari_mean"])
        if math.isnan(v):
            continue
        series.setdefault(str(r["algorithm"]), {}).setdefault(
            float(r["delay_level"]), []).append(v)
    if not series:
        raise ValueError("no finite rows to plot")
    curves = {alg: sorted((x, float(np.mean(v))) for x, v in pts.items())
              for alg, pts in sorted(series.items())}
    xs = [x for c in curves.values() for x, _ in c]
    ys = [y for c in curves.values() for _, y in c]
    frame = _Frame((min(xs), max(xs)), (0.0, max(ys)))
    body = frame.axes("delay level (samples)", "mean Amari distance",
                      "Amari distance vs delay")
    for k, (alg, pts) in enumerate(curves.items()):
        color = COLORS[k % len(COLORS)]
        coords = " ".join(f"{_f(frame.px(x))},{_f(frame.py(y))}"
                          for x, y in pts)
        body.append(f'<polyline class="series" fill="none" stroke="{color}" '
                    f'stroke-width="2" points="{coords}"/>')
        ly = MARGIN["top"] + 20 + 20 * k
        lx = WIDTH - MARGIN["right"] + 15
        body.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{lx + 30}" y="{ly}" '
                    f'dominant-baseline="middle">{escape(alg)}</text>')
    return _document(body)


def scatter_svg(rows):
    """Estimated vs. true centered delays with the least-squares line."""
    x = np.array([float(r["true_delay_centered"]) for r in rows])
    y = np.array([float(r["est_delay_centered"]) for r in rows])
    if x.size == 0:
        raise ValueError("no rows to plot")
    lo = float(min(x.min(), y.min()))
    hi = float(max(x.max(), y.max()))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    frame = _Frame((lo, hi), (lo, hi))
    body = frame.axes("true delay (centered)", "estimated delay (centered)",
                      "Delay recovery")
    for xi, yi in zip(x, y):
        body.append(f'<circle class="point" cx="{_f(frame.px(xi))}" '
                    f'cy="{_f(frame.py(yi))}" r="3" fill="{COLORS[0]}" '
                    'fill-opacity="0.6"/>')
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc)) if np.any(xc) else 0.0
    icpt = float(y.mean() - slope * x.mean())
    x0, x1 = frame.x0, frame.x1
    body.append(f'<line class="fit" x1="{_f(frame.px(x0))}" '
                f'y1="{_f(frame.py(icpt + slope * x0))}" '
                f'x2="{_f(frame.px(x1))}" y2="{_f(frame.py(icpt + slope * x1))}" '
                f'stroke="{COLORS[1]}" stroke-width="2"/>')
    body.append(f'<text x="{WIDTH - MARGIN["right"] + 10}" '
                f'y="{MARGIN["top"] + 20}">slope {slope:.3f}</text>')
    return _document(body)


def emit_plot(rows, kind, path):
    """Write a ``"line"`` or ``"scatter"`` SVG for ``rows`` to ``path``."""
    rows = list(rows)
    if not rows:
        raise ValueError("cannot plot empty input")
    if kind == "line":
        text = line_svg(rows)
    elif kind == "scatter":
        text = scatter_svg(rows)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
