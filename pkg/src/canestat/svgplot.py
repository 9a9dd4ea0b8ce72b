"""Dependency-free SVG charts with byte-reproducible output.

Fixed 800x600 canvas, fixed decimal formatting, no timestamps and no
rendering stack, so the same inputs always serialize to the same bytes.
"""

from __future__ import annotations

import math

import numpy as np

from .gmm import BIMODAL, ModalityDecision
from .hstats import Histogram

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 80
MARGIN_RIGHT = 30
MARGIN_TOP = 50
MARGIN_BOTTOM = 70

_PLOT_LEFT = MARGIN_LEFT
_PLOT_RIGHT = WIDTH - MARGIN_RIGHT
_PLOT_TOP = MARGIN_TOP
_PLOT_BOTTOM = HEIGHT - MARGIN_BOTTOM

POINT_COLOR = "#1f77b4"
LINE_COLOR = "#d62728"
BAR_COLOR = "#c8c8c8"
CANOPY_COLOR = "#2ca02c"
GROUND_COLOR = "#8c564b"
CURVE_COLORS = ("#8c564b", "#2ca02c")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _nice_ticks(lo: float, hi: float, n_target: int = 6):
    """Deterministic round-number axis ticks covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw_step = (hi - lo) / max(1, n_target)
    power = math.floor(math.log10(raw_step))
    base = raw_step / 10.0**power
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if base <= mult:
            step = mult * 10.0**power
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, max(0, -power + 2)))
        t += step
    return ticks


class _Canvas:
    """Accumulates SVG elements over a data-coordinate viewport."""

    def __init__(self, x_lo, x_hi, y_lo, y_hi, title, x_label, y_label):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        if y_hi <= y_lo:
            y_hi = y_lo + 1.0
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            '<rect x="0" y="0" width="800" height="600" fill="#ffffff"/>',
            f'<text x="400" y="28" text-anchor="middle" font-size="18" '
            f'font-family="sans-serif">{_escape(title)}</text>',
            f'<text x="{(_PLOT_LEFT + _PLOT_RIGHT) / 2:.0f}" y="{HEIGHT - 18}" '
            f'text-anchor="middle" font-size="14" font-family="sans-serif">'
            f"{_escape(x_label)}</text>",
            f'<text x="22" y="{(_PLOT_TOP + _PLOT_BOTTOM) / 2:.0f}" '
            f'text-anchor="middle" font-size="14" font-family="sans-serif" '
            f'transform="rotate(-90 22 {(_PLOT_TOP + _PLOT_BOTTOM) / 2:.0f})">'
            f"{_escape(y_label)}</text>",
        ]

    def px(self, x: float) -> float:
        frac = (x - self.x_lo) / (self.x_hi - self.x_lo)
        return _PLOT_LEFT + frac * (_PLOT_RIGHT - _PLOT_LEFT)

    def py(self, y: float) -> float:
        frac = (y - self.y_lo) / (self.y_hi - self.y_lo)
        return _PLOT_BOTTOM - frac * (_PLOT_BOTTOM - _PLOT_TOP)

    def axes(self):
        for tx in _nice_ticks(self.x_lo, self.x_hi):
            x = self.px(tx)
            self.parts.append(
                f'<line x1="{_fmt(x)}" y1="{_PLOT_TOP}" x2="{_fmt(x)}" '
                f'y2="{_PLOT_BOTTOM}" stroke="#e0e0e0" stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(x)}" y="{_PLOT_BOTTOM + 22}" text-anchor="middle" '
                f'font-size="12" font-family="sans-serif">{tx:g}</text>'
            )
        for ty in _nice_ticks(self.y_lo, self.y_hi):
            y = self.py(ty)
            self.parts.append(
                f'<line x1="{_PLOT_LEFT}" y1="{_fmt(y)}" x2="{_PLOT_RIGHT}" '
                f'y2="{_fmt(y)}" stroke="#e0e0e0" stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{_PLOT_LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                f'font-size="12" font-family="sans-serif">{ty:g}</text>'
            )
        self.parts.append(
            f'<rect x="{_PLOT_LEFT}" y="{_PLOT_TOP}" '
            f'width="{_PLOT_RIGHT - _PLOT_LEFT}" height="{_PLOT_BOTTOM - _PLOT_TOP}" '
            f'fill="none" stroke="#000000" stroke-width="1.5"/>'
        )

    def text(self, x_px: float, y_px: float, content: str, size: int = 14):
        self.parts.append(
            f'<text x="{_fmt(x_px)}" y="{_fmt(y_px)}" font-size="{size}" '
            f'font-family="sans-serif">{_escape(content)}</text>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def emit_regression_plot(result, summaries) -> str:
    """Scatter of zone medians with the best-fit line and its equation."""
    xs = np.array([s.median_height for s in summaries])
    ys = np.array([s.median_yield for s in summaries])
    x_pad = 0.08 * (xs.max() - xs.min() or 1.0)
    y_pad = 0.10 * (ys.max() - ys.min() or 1.0)
    canvas = _Canvas(
        xs.min() - x_pad,
        xs.max() + x_pad,
        ys.min() - y_pad,
        ys.max() + y_pad,
        title="Median yield vs derived cane height by treatment zone",
        x_label="Median derived cane height (m)",
        y_label="Median yield (tons/acre)",
    )
    canvas.axes()

    x0, x1 = canvas.x_lo, canvas.x_hi
    y0 = result.slope * x0 + result.intercept
    y1 = result.slope * x1 + result.intercept
    canvas.parts.append(
        f'<path d="M {_fmt(canvas.px(x0))} {_fmt(canvas.py(y0))} '
        f'L {_fmt(canvas.px(x1))} {_fmt(canvas.py(y1))}" stroke="{LINE_COLOR}" '
        f'stroke-width="2" fill="none"/>'
    )
    for s in summaries:
        canvas.parts.append(
            f'<circle cx="{_fmt(canvas.px(s.median_height))}" '
            f'cy="{_fmt(canvas.py(s.median_yield))}" r="5" fill="{POINT_COLOR}"/>'
        )
        canvas.text(
            canvas.px(s.median_height) + 8,
            canvas.py(s.median_yield) - 6,
            s.zone.abbreviation,
            size=11,
        )
    sign = "+" if result.intercept >= 0 else "-"
    canvas.text(
        _PLOT_LEFT + 14,
        _PLOT_TOP + 22,
        f"y = {result.slope:.3f}x {sign} {abs(result.intercept):.3f}",
    )
    canvas.text(_PLOT_LEFT + 14, _PLOT_TOP + 42, f"R² = {result.r_squared:.3f}")
    return canvas.render()


def _gaussian_curve(canvas, weight, mean, variance, total, bin_width, color):
    xs = np.linspace(canvas.x_lo, canvas.x_hi, 201)
    scale = weight * total * bin_width / np.sqrt(2.0 * np.pi * variance)
    ys = scale * np.exp(-((xs - mean) ** 2) / (2.0 * variance))
    points = " ".join(
        f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}" for x, y in zip(xs, ys)
    )
    canvas.parts.append(
        f'<polyline points="{points}" fill="none" stroke="{color}" '
        f'stroke-width="2"/>'
    )


def emit_histogram_plot(
    hist: Histogram,
    decision: ModalityDecision,
    canopy_kept=(),
    ground_kept=(),
    title: str = "Block elevation histogram",
) -> str:
    """Histogram bars, fitted component curves, and trimmed-bin shading.

    Bins kept by the canopy trim are green, bins kept by the ground trim
    brown, all others gray. A bimodal decision overlays both component
    curves of the k=2 fit; a unimodal one overlays the single k=1 curve.
    """
    canopy_kept = set(int(i) for i in np.asarray(canopy_kept, dtype=np.int64).ravel())
    ground_kept = set(int(i) for i in np.asarray(ground_kept, dtype=np.int64).ravel())
    y_max = float(hist.counts.max()) * 1.12
    canvas = _Canvas(
        float(hist.bin_edges[0]),
        float(hist.bin_edges[-1]),
        0.0,
        y_max,
        title=title,
        x_label="Elevation (m)",
        y_label="Pixel count",
    )
    canvas.axes()

    for i in range(hist.n_bins):
        count = int(hist.counts[i])
        if count == 0:
            continue
        if i in canopy_kept:
            color = CANOPY_COLOR
        elif i in ground_kept:
            color = GROUND_COLOR
        else:
            color = BAR_COLOR
        x_left = canvas.px(float(hist.bin_edges[i]))
        x_right = canvas.px(float(hist.bin_edges[i + 1]))
        y_top = canvas.py(float(count))
        canvas.parts.append(
            f'<rect x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
            f'width="{_fmt(x_right - x_left)}" '
            f'height="{_fmt(_PLOT_BOTTOM - y_top)}" fill="{color}" '
            f'stroke="#888888" stroke-width="0.5"/>'
        )

    fit = decision.fit_k2 if decision.modality == BIMODAL else decision.fit_k1
    for i in range(fit.k):
        _gaussian_curve(
            canvas,
            float(fit.weights[i]),
            float(fit.means[i]),
            float(fit.variances[i]),
            hist.total,
            hist.bin_width,
            CURVE_COLORS[i % len(CURVE_COLORS)],
        )
    canvas.text(
        _PLOT_LEFT + 14, _PLOT_TOP + 22, f"modality: {decision.modality}", size=12
    )
    return canvas.render()
