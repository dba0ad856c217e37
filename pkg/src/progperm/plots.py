"""Static SVG figures.

Plain string assembly with fixed number formatting, so identical inputs give
identical bytes. Only generic font families are referenced.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .data import FeatureTable, OutcomeKind, OutcomeVector, align
from .errors import MissingFullMixScenario, TooFewPoints
from .stats import neg_log10
from .summarize import AnalysisReport, rank_trace_matrix, significance_order

FONT = "sans-serif"
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _f(x: float) -> str:
    s = f"{float(x):.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = np.ceil(lo / step - 1e-9) * step
    ticks = np.arange(start, hi + step * 1e-6, step)
    return [float(round(t, 10)) for t in ticks]


@dataclass
class Canvas:
    """A single panel with linear x/y axes."""

    width: int = 640
    height: int = 420
    xlim: tuple[float, float] = (0.0, 1.0)
    ylim: tuple[float, float] = (0.0, 1.0)
    left: int = 70
    right: int = 20
    top: int = 40
    bottom: int = 55

    def __post_init__(self):
        self.items: list[str] = []

    def sx(self, x: float) -> float:
        x0, x1 = self.xlim
        span = (x1 - x0) or 1.0
        return self.left + (x - x0) / span * (self.width - self.left - self.right)

    def sy(self, y: float) -> float:
        y0, y1 = self.ylim
        span = (y1 - y0) or 1.0
        return self.height - self.bottom - (y - y0) / span * (self.height - self.top - self.bottom)

    def line(self, x0, y0, x1, y1, color="#000000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<line x1="{_f(self.sx(x0))}" y1="{_f(self.sy(y0))}" x2="{_f(self.sx(x1))}" '
            f'y2="{_f(self.sy(y1))}" stroke="{color}" stroke-width="{_f(width)}"{d}/>'
        )

    def polyline(self, xs, ys, color="#000000", width=1.0):
        pts = " ".join(f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{_f(width)}"/>')

    def circle(self, x, y, r=3.0, color="#000000", fill=None):
        self.items.append(
            f'<circle cx="{_f(self.sx(x))}" cy="{_f(self.sy(y))}" r="{_f(r)}" '
            f'fill="{fill or color}" stroke="{color}"/>'
        )

    def triangle(self, x, y, r=6.0, color="#d62728"):
        cx, cy = self.sx(x), self.sy(y)
        pts = f"{_f(cx)},{_f(cy - r)} {_f(cx - r)},{_f(cy + r * 0.8)} {_f(cx + r)},{_f(cy + r * 0.8)}"
        self.items.append(f'<polygon points="{pts}" fill="{color}"/>')

    def rect(self, x0, y0, x1, y1, fill="#000000", opacity=1.0):
        ax, bx = sorted((self.sx(x0), self.sx(x1)))
        ay, by = sorted((self.sy(y0), self.sy(y1)))
        self.items.append(
            f'<rect x="{_f(ax)}" y="{_f(ay)}" width="{_f(bx - ax)}" height="{_f(by - ay)}" '
            f'fill="{fill}" fill-opacity="{_f(opacity)}"/>'
        )

    def text(self, px, py, s, size=12, anchor="start", rotate=None, color="#000000"):
        """Text at pixel coordinates."""
        rot = f' transform="rotate({rotate} {_f(px)} {_f(py)})"' if rotate is not None else ""
        self.items.append(
            f'<text x="{_f(px)}" y="{_f(py)}" font-family="{FONT}" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{color}"{rot}>{escape(str(s))}</text>'
        )

    def axes(self, xlabel="", ylabel="", title="", xticks=None, yticks=None):
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        self.line(x0, y0, x1, y0)
        self.line(x0, y0, x0, y1)
        for t in xticks if xticks is not None else nice_ticks(x0, x1):
            if x0 - 1e-9 <= t <= x1 + 1e-9:
                self.line(t, y0, t, y0 - (y1 - y0) * 0.015)
                self.text(self.sx(t), self.sy(y0) + 16, _tick(t), size=11, anchor="middle")
        for t in yticks if yticks is not None else nice_ticks(y0, y1):
            if y0 - 1e-9 <= t <= y1 + 1e-9:
                self.line(x0, t, x0 - (x1 - x0) * 0.012, t)
                self.text(self.sx(x0) - 8, self.sy(t) + 4, _tick(t), size=11, anchor="end")
        self.text((self.left + self.width - self.right) / 2, self.height - 15, xlabel, anchor="middle")
        mid = (self.top + self.height - self.bottom) / 2
        self.text(18, mid, ylabel, anchor="middle", rotate=-90)
        self.text(self.width / 2, 24, title, size=14, anchor="middle")

    def legend(self, lines, px=None, py=None, size=11):
        px = self.width - self.right - 8 if px is None else px
        py = self.top + 14 if py is None else py
        for i, s in enumerate(lines):
            self.text(px, py + i * (size + 4), s, size=size, anchor="end")

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"


def _tick(t: float) -> str:
    if float(t).is_integer():
        return str(int(t))
    return f"{t:g}"


def _pad(lo: float, hi: float, frac: float = 0.05) -> tuple[float, float]:
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    d = (hi - lo) * frac
    return lo - d, hi + d


def emit_ucurve_plot(report: AnalysisReport) -> str:
    """Proportion of significant features against proportion of mixing.

    The observed point is a red triangle; permuted scenarios are black dots
    with their 95% bands.
    """
    curve = report.curve
    if curve.k.size < 2:
        raise TooFewPoints("the U-curve plot needs at least two scenarios")
    top = max(float(curve.prop_q975.max()), float(curve.prop.max()), 0.05)
    cv = Canvas(xlim=(-0.03, 1.03), ylim=(0.0, min(1.02, max(top * 1.15, 0.1))))
    cv.axes("proportion of mixing (k/K)", "proportion of significant features", "U-curve",
            xticks=[0, 0.25, 0.5, 0.75, 1.0])
    cv.polyline(curve.mixing, curve.prop, color="#7f7f7f")
    for m, p, lo, hi in zip(curve.mixing[1:], curve.prop[1:], curve.prop_q025[1:], curve.prop_q975[1:]):
        cv.line(m, lo, m, hi, width=1.2)
        cv.circle(m, p, r=3)
    cv.triangle(curve.mixing[0], curve.prop[0])
    if report.metrics is not None:
        m = report.metrics
        cv.legend([f"AOI = {m.aoi:.3f}", f"AUMC = {m.aumc:.3f}", f"slope0 = {m.slope0:.3f}", f"slope1 = {m.slope1:.3f}"])
    return cv.render()


def emit_rank_trace_plot(report: AnalysisReport, top_m: int = 50) -> str:
    """Median -log10 p traces of the most significant features across k."""
    order, mat = rank_trace_matrix(report.scenarios, report.feature_names)
    m = min(top_m, len(order))
    mat = mat[:m]
    ks = np.array(sorted(s.k for s in report.scenarios))
    mixing = ks / report.K if report.K else np.zeros_like(ks, dtype=float)
    alpha = report.config.get("alpha", 0.05)
    ymax = max(float(mat.max()) if mat.size else 1.0, float(neg_log10(alpha))) * 1.08
    cv = Canvas(xlim=(0.0, 1.0), ylim=(0.0, ymax))
    cv.axes("proportion of mixing (k/K)", "median -log10 p", f"rank traces (top {m})", xticks=[0, 0.25, 0.5, 0.75, 1.0])
    for i in range(m - 1, -1, -1):
        cv.polyline(mixing, mat[i], color=PALETTE[i % len(PALETTE)], width=0.8)
    cv.line(0.0, float(neg_log10(alpha)), 1.0, float(neg_log10(alpha)), color="#d62728", dash="4 3")
    return cv.render()


def emit_fragility_plot(report: AnalysisReport, top_m: int = 50) -> str:
    """Fragility index bars for the top features, highest first."""
    recs = report.fragility[: min(top_m, len(report.fragility))]
    recs = sorted(recs, key=lambda r: (-r.fi, r.feature))
    K_f = max(report.K_f, 1)
    cv = Canvas(width=max(640, 14 * len(recs) + 120), xlim=(0.0, max(len(recs), 1)), ylim=(0.0, K_f * 1.05))
    cv.right = 60
    cv.axes("feature (by fragility)", "fragility index", f"fragility (top {len(recs)})", xticks=[])
    for i, r in enumerate(recs):
        cv.rect(i + 0.1, 0.0, i + 0.9, r.fi, fill="#1f77b4", opacity=0.85)
    # sFI scale on the right edge
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = cv.sy(t * K_f)
        cv.text(cv.width - cv.right + 6, y + 4, f"{t:g}", size=11)
    cv.text(cv.width - 12, (cv.top + cv.height - cv.bottom) / 2, "scaled FI", anchor="middle", rotate=90)
    if report.mean_fi_top is not None:
        cv.legend([f"mean FI = {report.mean_fi_top:.2f}", f"mean sFI = {report.mean_sfi_top:.3f}"], px=cv.width - cv.right - 8)
    return cv.render()


def emit_coverage_plot(report: AnalysisReport, top_m: int = 50) -> str:
    """Observed -log10 p of the top features against their full-mixing band."""
    full = report.full_mix
    if full is None:
        raise MissingFullMixScenario(f"scenario k = K_f = {report.K_f} was not evaluated")
    obs = report.observed_p
    order = significance_order(obs, report.feature_names)[: min(top_m, len(obs))]
    flagged = {r.feature for r in report.identified}
    lo = neg_log10(full.q975_p[order])
    hi = neg_log10(full.q025_p[order])
    dots = neg_log10(obs[order])
    xmax = max(float(np.max(dots)), float(np.max(hi)), 1.0) * 1.08
    n = len(order)
    cv = Canvas(height=max(420, 12 * n + 100), xlim=(0.0, xmax), ylim=(-0.5, n - 0.5))
    cv.left = 120
    cv.axes("-log10 p", "", f"observed vs. full mixing (top {n})", yticks=[])
    for row, j in enumerate(order):
        y = n - 1 - row
        cv.line(lo[row], y, hi[row], y, color="#7f7f7f", width=2.0)
        hit = report.feature_names[j] in flagged
        cv.circle(dots[row], y, r=3.5, color="#d62728" if hit else "#1f77b4", fill=None if hit else "#ffffff")
        cv.text(cv.left - 6, cv.sy(y) + 4, report.feature_names[j], size=9, anchor="end")
    cv.legend([f"identified: {len(flagged)}"])
    return cv.render()


def emit_abundance_plot(table: FeatureTable, outcome: OutcomeVector, feature: str, seed: int = 0) -> str:
    """Jittered per-group abundances with median and quartile whiskers."""
    j = table.feature_index(feature)
    table, outcome = align(table, outcome)
    if outcome.kind is not OutcomeKind.BINARY:
        raise ValueError("abundance dot plots need a binary outcome")
    x = table.values[:, j]
    groups = [x[outcome.binary_labels == 1], x[outcome.binary_labels == 2]]
    names = outcome.levels or ("1", "2")
    ylo, yhi = _pad(float(x.min()), float(x.max()))
    cv = Canvas(width=420, xlim=(0.4, 2.6), ylim=(ylo, yhi))
    cv.axes("group", "abundance", feature, xticks=[])
    rng = np.random.default_rng([int(seed), zlib.crc32(feature.encode())])
    for g, vals in enumerate(groups, start=1):
        jitter = rng.uniform(-0.18, 0.18, size=vals.size)
        for dx, v in zip(jitter, vals):
            cv.circle(g + dx, v, r=2.5, color=PALETTE[g - 1], fill=PALETTE[g - 1])
        q1, med, q3 = np.quantile(vals, (0.25, 0.5, 0.75))
        cv.line(g + 0.28, q1, g + 0.28, q3, width=1.5)
        cv.line(g + 0.22, med, g + 0.34, med, width=2.0)
        cv.text(cv.sx(g), cv.height - cv.bottom + 18, names[g - 1], anchor="middle")
    return cv.render()


def emit_analytic_plot(curves, labels, title="analytic -log10 p") -> str:
    """Family of (mixing, -log10 p) curves."""
    ymax = max(float(np.max(y)) for _, y in curves) * 1.08 or 1.0
    cv = Canvas(xlim=(0.0, 1.0), ylim=(0.0, ymax))
    cv.axes("proportion of mixing (k/K)", "-log10 p", title, xticks=[0, 0.25, 0.5, 0.75, 1.0])
    for i, (x, y) in enumerate(curves):
        cv.polyline(x, y, color=PALETTE[i % len(PALETTE)], width=1.5)
    for i, lab in enumerate(labels):
        cv.text(cv.width - cv.right - 8, cv.top + 14 + i * 15, lab, size=11, anchor="end", color=PALETTE[i % len(PALETTE)])
    return cv.render()


def report_figures(report: AnalysisReport, top_m: int | None = None) -> dict[str, str]:
    """Every figure derivable from a report alone, keyed by file name.

    The U-curve is always attempted (a single-scenario report raises
    TooFewPoints); fragility and coverage figures are skipped when their
    scenarios were not evaluated.
    """
    m = top_m if top_m is not None else int(report.config.get("top_m", 50))
    out = {"ucurve.svg": emit_ucurve_plot(report), "traces.svg": emit_rank_trace_plot(report, m)}
    if report.fragility:
        out["fragility.svg"] = emit_fragility_plot(report, m)
    if report.full_mix is not None and report.K_f > 0:
        out["coverage.svg"] = emit_coverage_plot(report, m)
    return out
