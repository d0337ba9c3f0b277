"""Per-step records, CSV output and a small SVG line plotter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

CSV_HEADER = "trial,k,diam_hull,diam_inf,gap_bound,contains,empty,time_ns,ngen,ncon"


@dataclass(frozen=True)
class Row:
    trial: int
    k: int
    diam_hull: float
    diam_inf: float
    gap_bound: float
    contains: bool
    empty: bool
    time_ns: int
    ngen: int
    ncon: int


@dataclass
class TrialRecord:
    trial: int
    label: str = ""
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def row_line(r: Row) -> str:
    return ",".join([
        str(r.trial), str(r.k), fmt_float(r.diam_hull), fmt_float(r.diam_inf), fmt_float(r.gap_bound),
        str(int(r.contains)), str(int(r.empty)), str(r.time_ns), str(r.ngen), str(r.ncon),
    ])


def csv_text(records, comments=()) -> str:
    """CSV body sorted by trial id then step; ``comments`` become ``#`` lines on top."""
    lines = [f"# {c}" for c in comments]
    lines.append(CSV_HEADER)
    for rec in sorted(records, key=lambda r: r.trial):
        lines.extend(row_line(r) for r in sorted(rec.rows, key=lambda r: r.k))
    return "\n".join(lines) + "\n"


def write_csv(path, records, comments=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(records, comments))
    return path


def read_csv(path) -> list[dict]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or line == CSV_HEADER or not line:
            continue
        t, k, dh, di, g, c, e, tn, ng, nc = line.split(",")
        rows.append(dict(trial=int(t), k=int(k), diam_hull=float(dh), diam_inf=float(di), gap_bound=float(g),
                         contains=bool(int(c)), empty=bool(int(e)), time_ns=int(tn), ngen=int(ng), ncon=int(nc)))
    return rows


_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def svg_lines(series: dict, title: str = "", xlabel: str = "k", ylabel: str = "",
              width: int = 640, height: int = 400, log_y: bool = False) -> str:
    """Polylines for ``{label: (xs, ys)}`` with plain axes and a legend."""
    ml, mr, mt, mb = 60, 20, 30, 45
    pts = {}
    for label, (xs, ys) in series.items():
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        if log_y:
            ys = np.log10(np.where(ys > 0, ys, np.nan))
        ok = np.isfinite(xs) & np.isfinite(ys)
        pts[label] = (xs[ok], ys[ok])
    allx = np.concatenate([p[0] for p in pts.values()] or [np.zeros(1)])
    ally = np.concatenate([p[1] for p in pts.values()] or [np.zeros(1)])
    if allx.size == 0:
        allx = ally = np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def sy(y):
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" transform="rotate(-90 14 {height / 2})">'
        f'{escape(ylabel + (" (log10)" if log_y else ""))}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        out.append(f'<text x="{sx(xv):.1f}" y="{height - mb + 14}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{ml - 4}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    for i, (label, (xs, ys)) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = mt + 14 * (i + 1)
        out.append(f'<line x1="{width - mr - 110}" y1="{ly - 4}" x2="{width - mr - 90}" y2="{ly - 4}" stroke="{color}"/>')
        out.append(f'<text x="{width - mr - 86}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series: dict, **kw) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg_lines(series, **kw))
    return path
