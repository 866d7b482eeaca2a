"""Dependency-free static SVG bar charts for report rendering.

Charts embed the run-manifest digest in an XML comment so an output file can
be traced back to the invocation that produced it.
"""

from __future__ import annotations

from typing import Optional, Sequence

_PALETTE = ("#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756", "#72b7b2")

WIDTH = 640
HEIGHT = 360
MARGIN_L = 60
MARGIN_R = 20
MARGIN_T = 50
MARGIN_B = 60


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _header(title: str, digest: Optional[str]) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">'
    ]
    if digest:
        parts.append(f"<!-- manifest-digest: {_esc(digest)} -->")
    parts.append(
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{_esc(title)}</text>'
    )
    return parts


def _axes(max_value: float, y_label: str) -> list[str]:
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    parts = [
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="#333"/>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="#333"/>',
        f'<text x="16" y="{MARGIN_T + plot_h / 2}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + plot_h / 2})">{_esc(y_label)}</text>',
    ]
    for i in range(5):
        frac = i / 4
        y = HEIGHT - MARGIN_B - frac * plot_h
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{y + 4}" font-size="10" '
            f'text-anchor="end">{max_value * frac:.4g}</text>'
        )
        if i:
            parts.append(
                f'<line x1="{MARGIN_L}" y1="{y}" x2="{WIDTH - MARGIN_R}" y2="{y}" '
                f'stroke="#ddd" stroke-dasharray="3,3"/>'
            )
    return parts


def bar_chart(
    items: Sequence[tuple[str, float]],
    title: str,
    y_label: str = "",
    manifest_digest: Optional[str] = None,
) -> str:
    """Simple labeled bar chart; values are drawn with their numeric labels."""
    max_v = max((v for _, v in items), default=1.0) or 1.0
    parts = _header(title, manifest_digest) + _axes(max_v, y_label)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    n = max(len(items), 1)
    slot = plot_w / n
    bar_w = slot * 0.6
    for i, (label, value) in enumerate(items):
        h = plot_h * value / max_v
        x = MARGIN_L + i * slot + (slot - bar_w) / 2
        y = HEIGHT - MARGIN_B - h
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{h:.1f}" fill="{color}"/>')
        parts.append(
            f'<text x="{x + bar_w / 2:.1f}" y="{y - 4:.1f}" font-size="10" '
            f'text-anchor="middle">{value:.2f}</text>'
        )
        parts.append(
            f'<text x="{x + bar_w / 2:.1f}" y="{HEIGHT - MARGIN_B + 16}" font-size="10" '
            f'text-anchor="middle">{_esc(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grouped_bar_chart(
    metrics: Sequence[str],
    series: Sequence[tuple[str, Sequence[float]]],
    title: str,
    y_label: str = "",
    manifest_digest: Optional[str] = None,
) -> str:
    """One bar cluster per metric, one colored bar per series."""
    all_values = [v for _, vs in series for v in vs]
    max_v = max(all_values, default=1.0) or 1.0
    parts = _header(title, manifest_digest) + _axes(max_v, y_label)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    n_groups = max(len(metrics), 1)
    n_series = max(len(series), 1)
    slot = plot_w / n_groups
    bar_w = slot * 0.8 / n_series
    for g, metric in enumerate(metrics):
        for s, (name, values) in enumerate(series):
            v = values[g]
            h = plot_h * v / max_v
            x = MARGIN_L + g * slot + slot * 0.1 + s * bar_w
            y = HEIGHT - MARGIN_B - h
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w * 0.9:.1f}" '
                f'height="{h:.1f}" fill="{_PALETTE[s % len(_PALETTE)]}"/>'
            )
        parts.append(
            f'<text x="{MARGIN_L + g * slot + slot / 2:.1f}" y="{HEIGHT - MARGIN_B + 16}" '
            f'font-size="10" text-anchor="middle">{_esc(metric)}</text>'
        )
    for s, (name, _) in enumerate(series):
        x = MARGIN_L + 10 + s * 150
        parts.append(
            f'<rect x="{x}" y="{MARGIN_T - 16}" width="10" height="10" '
            f'fill="{_PALETTE[s % len(_PALETTE)]}"/>'
        )
        parts.append(f'<text x="{x + 14}" y="{MARGIN_T - 7}" font-size="11">{_esc(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def quadrant_chart(report_dict: dict, manifest_digest: Optional[str] = None) -> str:
    pct = report_dict["pct"]
    items = [(k.upper(), pct[k]) for k in ("q1", "q2", "q3", "q4")]
    return bar_chart(items, "Quadrant shares", "% of pairs", manifest_digest)


def histogram_chart(
    histogram: dict, title: str, manifest_digest: Optional[str] = None
) -> str:
    items = [(str(k), float(v)) for k, v in sorted(histogram.items(), key=lambda kv: int(kv[0]))]
    return bar_chart(items, title, "% of questions", manifest_digest)
