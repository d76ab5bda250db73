"""Dependency-free SVG line chart of a calibration curve."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .calibrate import SearchResult, factor_name

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def curve_svg(result: SearchResult) -> str:
    pts = [(p.w, 100 * p.mean_sim) for p in result.curve]
    w_max = max(w for w, _ in pts) or 1.0
    s_lo = min(s for _, s in pts)
    s_hi = max(s for _, s in pts)
    if s_hi - s_lo < 1e-6:
        s_lo, s_hi = s_lo - 1, s_hi + 1
    pad = (s_hi - s_lo) * 0.05
    s_lo, s_hi = s_lo - pad, s_hi + pad
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def sx(w):
        return LEFT + plot_w * w / w_max

    def sy(v):
        return TOP + plot_h * (1 - (v - s_lo) / (s_hi - s_lo))

    title = escape(f"Similarity scores of {factor_name(result.kind)}")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
    ]
    for t in _ticks(0.0, w_max):
        x = sx(t)
        out.append(f'<line x1="{x:.1f}" y1="{TOP + plot_h}" x2="{x:.1f}" y2="{TOP + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{TOP + plot_h + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(s_lo, s_hi):
        y = sy(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.1f}" x2="{LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.1f}" text-anchor="end">{t:.2f}</text>')
    out.append(
        f'<text x="{LEFT + plot_w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">weight w (m)</text>'
    )
    out.append(
        f'<text x="16" y="{TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + plot_h / 2:.1f})">mean similarity (%)</text>'
    )
    bx = sx(result.best_w)
    out.append(f'<line x1="{bx:.1f}" y1="{TOP}" x2="{bx:.1f}" y2="{TOP + plot_h}" stroke="red"/>')
    poly = " ".join(f"{sx(w):.1f},{sy(v):.1f}" for w, v in pts)
    out.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
