"""Deterministic artifact emission: SVG drawings and CSV/JSON exports.

All output is byte-stable for a fixed input: no timestamps, sorted edge sets,
fixed float formatting.  Floats in CSV use 17 significant digits so parsing
them back reproduces the exact double.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tessellation import TriangulationResult

FMT = "%.17g"


@dataclass(frozen=True)
class RenderStyle:
    canvas: int = 640
    delaunay_stroke: float = 1.0
    voronoi_stroke: float = 0.8
    site_radius: float = 1.8
    palette: dict = field(default_factory=lambda: {
        "Delaunay": "#1f3a5f",
        "Voronoi": "#b0413e",
        "BoundaryUncertain": "#e8c3a0",
        "Sites": "#222222",
        "Background": "#ffffff",
    })


def _viewport(target_box, canvas: int):
    """Affine map target_box -> canvas, aspect ratio preserved, y flipped."""
    (x0, x1), (y0, y1) = target_box
    w, h = x1 - x0, y1 - y0
    scale = canvas / max(w, h)
    # center the shorter side
    ox = (canvas - scale * w) / 2.0
    oy = (canvas - scale * h) / 2.0

    def to_px(pt):
        return (ox + (pt[0] - x0) * scale, canvas - oy - (pt[1] - y0) * scale)

    return to_px


def _fmt(x: float) -> str:
    return "%.3f" % x


def render_svg(t: TriangulationResult, style: RenderStyle | None = None,
               layers=("Delaunay", "Voronoi", "Sites")) -> str:
    """SVG 1.1 drawing of a planar tessellation.

    Delaunay edges join site coordinates; Voronoi edges join the apexes of
    edge-adjacent triangles; BoundaryUncertain triangles are filled with a
    distinct color.  Output bytes depend only on the input.
    """
    style = style or RenderStyle()
    box = t.window.target_box if t.window is not None else _bounding_box(t)
    c = style.canvas
    to_px = _viewport(box, c)
    pal = style.palette
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
              f'width="{c}" height="{c}" viewBox="0 0 {c} {c}">\n')
    out.write(f'<rect width="{c}" height="{c}" fill="{pal["Background"]}"/>\n')
    if t.simplices.shape[0] == 0:
        out.write("<!-- empty tessellation -->\n</svg>\n")
        return out.getvalue()

    flagged = np.flatnonzero(~t.flags)
    if len(flagged) and "Delaunay" in layers:
        out.write(f'<g fill="{pal["BoundaryUncertain"]}" stroke="none">\n')
        for i in flagged:
            pts = [to_px(v) for v in t.sites_v[t.simplices[i]]]
            path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
            out.write(f'<polygon points="{path}"/>\n')
        out.write("</g>\n")

    if "Delaunay" in layers:
        edges = set()
        for tri in t.simplices:
            a, b, c3 = map(int, tri)
            edges.update([(min(a, b), max(a, b)), (min(a, c3), max(a, c3)),
                          (min(b, c3), max(b, c3))])
        out.write(f'<g stroke="{pal["Delaunay"]}" '
                  f'stroke-width="{style.delaunay_stroke}">\n')
        for a, b in sorted(edges):
            xa, ya = to_px(t.sites_v[a])
            xb, yb = to_px(t.sites_v[b])
            out.write(f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" '
                      f'x2="{_fmt(xb)}" y2="{_fmt(yb)}"/>\n')
        out.write("</g>\n")

    if "Voronoi" in layers:
        # apexes of triangles sharing an edge are Laguerre-adjacent
        edge_to_tris: dict[tuple, list[int]] = {}
        for idx, tri in enumerate(t.simplices):
            a, b, c3 = map(int, tri)
            for e in [(a, b), (a, c3), (b, c3)]:
                edge_to_tris.setdefault(e, []).append(idx)
        out.write(f'<g stroke="{pal["Voronoi"]}" '
                  f'stroke-width="{style.voronoi_stroke}">\n')
        for e in sorted(edge_to_tris):
            tris = edge_to_tris[e]
            if len(tris) == 2:
                xa, ya = to_px(t.apex_w[tris[0]])
                xb, yb = to_px(t.apex_w[tris[1]])
                out.write(f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" '
                          f'x2="{_fmt(xb)}" y2="{_fmt(yb)}"/>\n')
        out.write("</g>\n")
        out.write(f'<g fill="{pal["Voronoi"]}">\n')
        for i in range(t.apex_w.shape[0]):
            x, y = to_px(t.apex_w[i])
            out.write(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1.2"/>\n')
        out.write("</g>\n")

    if "Sites" in layers:
        out.write(f'<g fill="{pal["Sites"]}">\n')
        used = sorted({int(i) for tri in t.simplices for i in tri})
        for i in used:
            x, y = to_px(t.sites_v[i])
            out.write(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" '
                      f'r="{style.site_radius}"/>\n')
        out.write("</g>\n")
    out.write("</svg>\n")
    return out.getvalue()


def _bounding_box(t: TriangulationResult):
    v = t.sites_v
    return ((float(v[:, 0].min()), float(v[:, 0].max())),
            (float(v[:, 1].min()), float(v[:, 1].max())))


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return FMT % x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    s = str(x)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def export_csv(rows, fieldnames) -> str:
    """Header + one row per record; floats at 17 significant digits."""
    out = [",".join(fieldnames)]
    for row in rows:
        if isinstance(row, dict):
            out.append(",".join(_cell(row[k]) for k in fieldnames))
        else:
            out.append(",".join(_cell(x) for x in row))
    return "\n".join(out) + "\n"


SIMPLEX_FIELDS = ["id", "v1x", "v1y", "v2x", "v2y", "v3x", "v3y",
                  "apex_wx", "apex_wy", "apex_t", "r", "flag"]


def export_simplices_csv(t: TriangulationResult) -> str:
    names = t.flag_names()
    rows = []
    for i, tri in enumerate(t.simplices):
        v = t.sites_v[tri]
        rows.append([i, v[0, 0], v[0, 1], v[1, 0], v[1, 1], v[2, 0], v[2, 1],
                     t.apex_w[i, 0], t.apex_w[i, 1], t.apex_t[i],
                     t.apex_r[i], names[i]])
    return export_csv(rows, SIMPLEX_FIELDS)


def parse_csv(text: str):
    """Inverse of export_csv for numeric/string cells (no quoting support
    beyond what export_csv emits for plain flags)."""
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        row = []
        for cell in ln.split(","):
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(dict(zip(header, row)))
    return rows


def reports_json(reports, config: dict | None = None, seed=None) -> str:
    """Stable-key-order JSON for a list of MCReport-like objects."""
    payload = {"reports": [r.to_dict() for r in reports]}
    if config is not None:
        payload["config"] = config
    if seed is not None:
        payload["seed"] = seed
    payload["artifact_version"] = 1
    return json.dumps(_sanitize(payload), sort_keys=True, indent=2)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj
