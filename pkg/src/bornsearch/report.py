"""CSV and SVG report emission.

The SVG charts are written by hand rather than through a plotting library so that
identical inputs produce identical bytes; plotting libraries stamp generator
versions and timestamps into their output, which would break reproducible-run
comparisons. Numbers are formatted with a fixed precision for the same reason.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .runio import atomic_write_text

PALETTE = ("#4878a8", "#e08a3c", "#5aa469", "#b35a5a", "#7a6aa8")


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def write_table_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def write_histogram_csv(path: str | Path, bitstrings: list[str], series: dict[str, np.ndarray]) -> None:
    """Per-bitstring probabilities, one column per series; each column sums to ~1."""
    header = ["bitstring"] + list(series)
    cols = [np.asarray(v, dtype=np.float64) for v in series.values()]
    for name, col in zip(series, cols):
        if col.shape != (len(bitstrings),):
            raise ValueError(f"series {name!r} has {col.shape[0]} rows for {len(bitstrings)} bitstrings")
    rows = [
        [s] + [format(col[i], ".12g") for col in cols] for i, s in enumerate(bitstrings)
    ]
    write_table_csv(path, header, rows)


def write_loss_csv(path: str | Path, losses: list[float]) -> None:
    """One row per training epoch; losses[e-1] is the loss after epoch e."""
    write_table_csv(
        path, ["epoch", "mmd"], [[e + 1, format(v, ".12g")] for e, v in enumerate(losses)]
    )


def _svg_header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]


def svg_grouped_bars(
    path: str | Path,
    categories: list[str],
    series: dict[str, list[float]],
    title: str,
) -> None:
    """Grouped bar chart with a legend; byte-deterministic for fixed inputs."""
    width, height = 960, 400
    left, right, top, bottom = 60, 20, 40, 70
    plot_w, plot_h = width - left - right, height - top - bottom
    names = list(series)
    values = [list(map(float, series[n])) for n in names]
    peak = max((max(v) for v in values if v), default=0.0) or 1.0
    ncat, nser = len(categories), len(names)
    group_w = plot_w / max(ncat, 1)
    bar_w = group_w * 0.8 / max(nser, 1)

    out = _svg_header(width, height, title)
    out.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" '
        f'stroke="#333"/>'
    )
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#333"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h - frac * plot_h
        out.append(
            f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10">'
            f"{_fmt(frac * peak)}</text>"
        )
        if frac > 0:
            out.append(
                f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + plot_w}" y2="{_fmt(y)}" '
                f'stroke="#ddd"/>'
            )
    for i, cat in enumerate(categories):
        gx = left + i * group_w
        for j, vals in enumerate(values):
            v = vals[i]
            h = plot_h * v / peak
            x = gx + group_w * 0.1 + j * bar_w
            y = top + plot_h - h
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(h)}" fill="{PALETTE[j % len(PALETTE)]}"/>'
            )
        step = max(1, ncat // 24)
        if i % step == 0:
            tx = gx + group_w / 2
            ty = top + plot_h + 10
            out.append(
                f'<text x="{_fmt(tx)}" y="{ty}" text-anchor="end" font-size="9" '
                f'transform="rotate(-60 {_fmt(tx)} {ty})">{cat}</text>'
            )
    for j, name in enumerate(names):
        lx = left + 10 + j * 150
        out.append(
            f'<rect x="{lx}" y="{height - 16}" width="12" height="12" '
            f'fill="{PALETTE[j % len(PALETTE)]}"/>'
        )
        out.append(f'<text x="{lx + 16}" y="{height - 6}" font-size="11">{name}</text>')
    out.append("</svg>")
    atomic_write_text(path, "\n".join(out) + "\n")


def svg_line_chart(path: str | Path, ys: list[float], title: str, y_label: str) -> None:
    """Single-series line chart over integer x; used for loss curves."""
    width, height = 720, 360
    left, right, top, bottom = 60, 20, 40, 40
    plot_w, plot_h = width - left - right, height - top - bottom
    peak = max(ys, default=0.0) or 1.0
    n = len(ys)
    pts = []
    for i, v in enumerate(ys):
        x = left + (plot_w * i / max(n - 1, 1))
        y = top + plot_h - plot_h * float(v) / peak
        pts.append(f"{_fmt(x)},{_fmt(y)}")
    out = _svg_header(width, height, title)
    out.append(f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="#333"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#333"/>')
    out.append(
        f'<text x="16" y="{top + plot_h // 2}" font-size="11" '
        f'transform="rotate(-90 16 {top + plot_h // 2})" text-anchor="middle">{y_label}</text>'
    )
    for frac in (0.0, 0.5, 1.0):
        y = top + plot_h - frac * plot_h
        out.append(
            f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10">'
            f"{_fmt(frac * peak)}</text>"
        )
    if pts:
        out.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="{PALETTE[0]}" '
            f'stroke-width="1.5"/>'
        )
    out.append("</svg>")
    atomic_write_text(path, "\n".join(out) + "\n")
