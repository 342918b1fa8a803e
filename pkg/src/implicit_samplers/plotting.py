"""Dependency-free log-log SVG plots of Q against the sweep axis."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .experiment import DECLARED_SLOPES, ResultRow, geometric_anchor
from .quality import Q_FLOOR, fit_slope

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 120, 30, 60

STYLE = {
    "lm": ("turquoise", "square"),
    "slm": ("blue", "diamond"),
    "rm": ("red", "dot"),
    "srm": ("purple", "circle"),
}
AXIS_LABEL = {"epsilon": "epsilon", "T": "T", "n_dim": "N"}


class _LogAxes:
    def __init__(self, xs, ys):
        self.x0, self.x1 = _padded_decades(xs)
        self.y0, self.y1 = _padded_decades(ys)

    def px(self, x: float) -> float:
        f = (math.log10(x) - self.x0) / (self.x1 - self.x0)
        return MARGIN_L + f * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        f = (math.log10(y) - self.y0) / (self.y1 - self.y0)
        return HEIGHT - MARGIN_B - f * (HEIGHT - MARGIN_T - MARGIN_B)


def _padded_decades(vals) -> tuple[float, float]:
    lo = math.floor(math.log10(min(vals)) - 0.05)
    hi = math.ceil(math.log10(max(vals)) + 0.05)
    return float(lo), float(max(hi, lo + 1))


def _n(v: float) -> str:
    return f"{v:.2f}"


def _marker(shape: str, color: str, x: float, y: float, method: str) -> str:
    r = 5.0
    cls = f'class="marker" data-method="{method}"'
    if shape == "square":
        return f'<rect {cls} x="{_n(x - r)}" y="{_n(y - r)}" width="{_n(2 * r)}" height="{_n(2 * r)}" fill="{color}"/>'
    if shape == "diamond":
        pts = f"{_n(x)},{_n(y - r - 1)} {_n(x + r + 1)},{_n(y)} {_n(x)},{_n(y + r + 1)} {_n(x - r - 1)},{_n(y)}"
        return f'<polygon {cls} points="{pts}" fill="{color}"/>'
    if shape == "dot":
        return f'<circle {cls} cx="{_n(x)}" cy="{_n(y)}" r="{_n(r - 1)}" fill="{color}"/>'
    return f'<circle {cls} cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" fill="none" stroke="{color}" stroke-width="1.5"/>'


def _ticks(ax: _LogAxes) -> list[str]:
    out = []
    bottom, left = HEIGHT - MARGIN_B, MARGIN_L
    for k in range(int(ax.x0), int(ax.x1) + 1):
        x = ax.px(10.0**k)
        out.append(f'<line x1="{_n(x)}" y1="{bottom}" x2="{_n(x)}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{_n(x)}" y="{bottom + 20}" text-anchor="middle" font-size="12">1e{k}</text>')
    for k in range(int(ax.y0), int(ax.y1) + 1):
        y = ax.py(10.0**k)
        out.append(f'<line x1="{left - 5}" y1="{_n(y)}" x2="{left}" y2="{_n(y)}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_n(y + 4)}" text-anchor="end" font-size="12">1e{k}</text>')
    return out


def _y(r: ResultRow) -> float:
    # exact-weight runs give Q = 0, drawn at the floor
    return max(r.q_hat, Q_FLOOR)


def render_svg(table: Sequence[ResultRow]) -> str:
    rows = [r for r in table if r.ok and r.q_hat is not None]
    if not rows:
        raise ValueError("no successful rows to plot")
    axis = rows[0].axis
    methods = list(dict.fromkeys(r.method for r in rows))

    # reference lines: declared slope, anchored to predictions when present
    refs = []
    for method in methods:
        slope = DECLARED_SLOPES.get(axis, {}).get(method)
        mrows = [r for r in rows if r.method == method]
        if slope is None:
            continue
        xs = [r.axis_value for r in mrows]
        with_pred = [r for r in mrows if r.q_pred is not None and r.q_pred > 0]
        if with_pred:
            c = geometric_anchor([r.axis_value for r in with_pred], [r.q_pred for r in with_pred], slope)
            anchor = "prediction"
        else:
            c = geometric_anchor(xs, [_y(r) for r in mrows], slope)
            anchor = "data"
        xa, xb = min(xs), max(xs)
        if xa == xb:
            continue
        fit = fit_slope(xs, [_y(r) for r in mrows])[0] if len(set(xs)) >= 2 else None
        refs.append((method, slope, anchor, fit, xa, c * xa**slope, xb, c * xb**slope))

    all_y = [_y(r) for r in rows] + [y for ref in refs for y in (ref[5], ref[7])]
    ax = _LogAxes([r.axis_value for r in rows], all_y)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-axis="{escape(axis)}" '
        f'data-log10-x-range="{ax.x0:g} {ax.x1:g}" data-log10-y-range="{ax.y0:g} {ax.y1:g}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}" '
        f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="black"/>',
    ]
    out.extend(_ticks(ax))
    out.append(
        f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-size="14">{escape(AXIS_LABEL.get(axis, axis))}</text>'
    )
    out.append(
        f'<text x="20" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.0f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {(MARGIN_T + HEIGHT - MARGIN_B) / 2:.0f})">Q</text>'
    )
    for method, slope, anchor, fit, xa, ya, xb, yb in refs:
        color = STYLE.get(method, ("black", "dot"))[0]
        fit_attr = f' data-fit-slope="{fit:.4f}"' if fit is not None else ""
        out.append(
            f'<line class="reference" data-method="{method}" data-slope="{slope}" data-anchor="{anchor}"{fit_attr} '
            f'data-log10-start="{math.log10(xa)!r} {math.log10(ya)!r}" data-log10-end="{math.log10(xb)!r} {math.log10(yb)!r}" '
            f'x1="{_n(ax.px(xa))}" y1="{_n(ax.py(ya))}" x2="{_n(ax.px(xb))}" y2="{_n(ax.py(yb))}" '
            f'stroke="{color}" stroke-width="1"/>'
        )
    for r in rows:
        color, shape = STYLE.get(r.method, ("black", "dot"))
        out.append(_marker(shape, color, ax.px(r.axis_value), ax.py(_y(r)), r.method))
    for i, method in enumerate(methods):
        color, shape = STYLE.get(method, ("black", "dot"))
        y = MARGIN_T + 15 + 20 * i
        x = WIDTH - MARGIN_R + 20
        out.append(_marker(shape, color, x, y, method).replace('class="marker"', 'class="legend"'))
        out.append(f'<text x="{x + 12}" y="{y + 4}" font-size="12">{method.upper()}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(table: Sequence[ResultRow], path) -> None:
    """Write the log-log SVG; raises before touching ``path`` if nothing can be drawn."""
    svg = render_svg(table)
    with open(path, "w") as fh:
        fh.write(svg)
