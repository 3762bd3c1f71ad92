"""Deterministic CSV, JSON and SVG writers plus contour extraction."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "contour_polylines",
    "format_number",
    "write_csv",
    "write_json",
    "sha256_file",
    "log_color",
    "Layer",
    "export_svg",
]


def contour_polylines(x, y, Z, levels) -> dict[float, list[np.ndarray]]:
    """Level curves of ``Z[iy, ix]`` as lists of complex polylines ``x + iy``.

    NaN cells are masked.  Uses contourpy's marching squares.
    """
    import contourpy

    Z = np.ma.masked_invalid(np.asarray(Z, dtype=float))
    gen = contourpy.contour_generator(np.asarray(x, float), np.asarray(y, float), Z,
                                      line_type=contourpy.LineType.Separate)
    out = {}
    for lev in levels:
        lines = gen.lines(float(lev))
        out[float(lev)] = [ln[:, 0] + 1j * ln[:, 1] for ln in lines if len(ln) > 1]
    return out


def format_number(v) -> str:
    """Fixed textual form: 17 significant digits, ``nan``/``inf`` spelled out."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0"
    return f"{v:.17g}"


def write_csv(path, header, rows) -> None:
    """Write rows of numbers and strings with ``\\n`` line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# SVG


def log_color(value: float, vmin: float, vmax: float) -> str:
    """Map ``log10(value)`` linearly from dark blue (``vmin``) to yellow (``vmax``)."""
    if not (value > 0 and np.isfinite(value)):
        return "#ffffff"
    lo, hi = math.log10(vmin), math.log10(vmax)
    t = 0.0 if hi <= lo else (math.log10(value) - lo) / (hi - lo)
    t = min(max(t, 0.0), 1.0)
    c0, c1 = np.array([0x20, 0x10, 0x60]), np.array([0xf8, 0xe0, 0x30])
    r, g, b = np.rint(c0 + t * (c1 - c0)).astype(int)
    return f"#{r:02x}{g:02x}{b:02x}"


@dataclass
class Layer:
    """One SVG layer.

    ``kind`` is ``"scatter"`` (``points`` complex array), ``"curve"``
    (NaN-separated complex polyline) or ``"field"`` (``grid`` = (x, y, Z)).
    """

    kind: str
    label: str
    points: np.ndarray | None = None
    grid: tuple | None = None
    color: str = "#000000"
    extra: dict = field(default_factory=dict)


def _f(v: float) -> str:
    return f"{v:.3f}"


def export_svg(layers, window=None, width: int = 480, height: int = 480, title: str = "") -> str:
    """Render layers in the λ-plane as an SVG string.

    Output depends only on the inputs.  An empty dataset yields a frame with a
    warning annotation.
    """
    layers = list(layers or [])
    pts = [l.points for l in layers if l.points is not None and len(l.points)]
    if window is None:
        allp = np.concatenate(pts) if pts else np.zeros(0, complex)
        allp = allp[np.isfinite(allp)]
        if allp.size:
            x0, x1 = allp.real.min(), allp.real.max()
            y0, y1 = allp.imag.min(), allp.imag.max()
            px, py = max(0.05 * (x1 - x0), 0.5), max(0.05 * (y1 - y0), 0.5)
            window = (x0 - px, x1 + px, y0 - py, y1 + py)
        else:
            window = (-1.0, 1.0, -1.0, 1.0)
    x0, x1, y0, y1 = map(float, window)
    ml, mr, mt, mb = 50, 110, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect class="frame" x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
    ]
    if title:
        out.append(f'<text class="title" x="{ml}" y="{mt - 10}" font-size="12">{title}</text>')
    for t in np.linspace(x0, x1, 5):
        out.append(f'<text class="tick" x="{_f(sx(t))}" y="{mt + ph + 15}" font-size="9" '
                   f'text-anchor="middle">{t:.2g}</text>')
    for t in np.linspace(y0, y1, 5):
        out.append(f'<text class="tick" x="{ml - 5}" y="{_f(sy(t))}" font-size="9" '
                   f'text-anchor="end">{t:.2g}</text>')
    out.append(f'<text class="axis" x="{ml + pw / 2}" y="{height - 5}" font-size="10" '
               f'text-anchor="middle">Re λ</text>')
    out.append(f'<text class="axis" x="12" y="{mt + ph / 2}" font-size="10">Im λ</text>')
    if not pts and not any(l.grid is not None for l in layers):
        out.append(f'<text class="warning" x="{ml + 10}" y="{mt + 20}" font-size="11" '
                   f'fill="#aa0000">warning: empty dataset</text>')
    out.append(f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>')
    for li, layer in enumerate(layers):
        out.append(f'<g class="layer {layer.kind}" clip-path="url(#plot)">')
        if layer.kind == "field" and layer.grid is not None:
            gx, gy, Z = layer.grid
            gx, gy, Z = np.asarray(gx), np.asarray(gy), np.asarray(Z)
            fin = Z[np.isfinite(Z) & (Z > 0)]
            vmin = float(fin.min()) if fin.size else 1.0
            vmax = float(fin.max()) if fin.size else 1.0
            dx = (gx[1] - gx[0]) if len(gx) > 1 else (x1 - x0)
            dy = (gy[1] - gy[0]) if len(gy) > 1 else (y1 - y0)
            for iy, yy in enumerate(gy):
                for ix, xx in enumerate(gx):
                    w = abs(sx(xx + dx / 2) - sx(xx - dx / 2))
                    h = abs(sy(yy - dy / 2) - sy(yy + dy / 2))
                    out.append(f'<rect class="cell" x="{_f(sx(xx - dx / 2))}" y="{_f(sy(yy + dy / 2))}" '
                               f'width="{_f(w)}" height="{_f(h)}" '
                               f'fill="{log_color(Z[iy, ix], vmin, vmax)}"/>')
        elif layer.kind == "curve" and layer.points is not None:
            segs, cur = [], []
            for z in layer.points:
                if np.isfinite(z):
                    cur.append(f"{_f(sx(z.real))},{_f(sy(z.imag))}")
                elif cur:
                    segs.append(cur)
                    cur = []
            if cur:
                segs.append(cur)
            for s in segs:
                out.append(f'<polyline class="curve" fill="none" stroke="{layer.color}" '
                           f'stroke-width="1.2" points="{" ".join(s)}"/>')
        elif layer.kind == "scatter" and layer.points is not None:
            for z in layer.points:
                if np.isfinite(z):
                    out.append(f'<circle class="marker" cx="{_f(sx(z.real))}" cy="{_f(sy(z.imag))}" '
                               f'r="2" fill="{layer.color}"/>')
        out.append("</g>")
        ly = mt + 12 + 16 * li
        out.append(f'<rect class="legend-key" x="{ml + pw + 10}" y="{ly - 8}" width="10" height="10" '
                   f'fill="{layer.color}"/>')
        out.append(f'<text class="legend" x="{ml + pw + 24}" y="{ly}" font-size="10">{layer.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
