"""Static SVG pictures of lattice polygons and self-intersection cycles."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .toricgeom import LatticePolygon

UNIT = 60
PANEL = 320


def _polygon_group(poly: LatticePolygon, title: str, ox: float, oy: float) -> list[str]:
    cx, cy = ox + PANEL / 2, oy + PANEL / 2 + 10
    to = lambda p: (cx + p[0] * UNIT, cy - p[1] * UNIT)  # noqa: E731
    hull = " ".join(f"{x:.1f},{y:.1f}" for x, y in map(to, poly.hull()))
    out = [f'<g class="polygon"><text x="{ox + 10}" y="{oy + 20}" font-size="14">{escape(title)}</text>']
    out.append(f'<polygon points="{hull}" fill="#dde8f4" stroke="#234" stroke-width="2"/>')
    labels = poly.labels or [""] * len(poly.points)
    for p, lab in zip(poly.points, labels):
        x, y = to(p)
        out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4" fill="#234"/>')
        out.append(f'<text x="{x + 6:.1f}" y="{y - 6:.1f}" font-size="12">{escape(str(lab))}</text>')
    out.append("</g>")
    return out


def _cycle_group(cycle: Sequence[tuple[str, int]], title: str, ox: float, oy: float) -> list[str]:
    cx, cy, r = ox + PANEL / 2, oy + PANEL / 2 + 10, PANEL / 2 - 50
    n = len(cycle)
    pts = [(cx + r * math.cos(2 * math.pi * k / n), cy - r * math.sin(2 * math.pi * k / n)) for k in range(n)]
    out = [f'<g class="cycle"><text x="{ox + 10}" y="{oy + 20}" font-size="14">{escape(title)}</text>']
    for k, (label, a) in enumerate(cycle):
        (x0, y0), (x1, y1) = pts[k], pts[(k + 1) % n]
        out.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" y2="{y1:.1f}" stroke="#823" stroke-width="3"/>')
        mx, my = (x0 + x1) / 2, (y0 + y1) / 2
        tx, ty = cx + (mx - cx) * 1.25, cy + (my - cy) * 1.25
        out.append(
            f'<text x="{tx:.1f}" y="{ty:.1f}" font-size="11" text-anchor="middle">{escape(label)} ({a})</text>'
        )
    out.append("</g>")
    return out


def render(polygons: Sequence[tuple[str, LatticePolygon]], cycles: Sequence[tuple[str, Sequence[tuple[str, int]]]]) -> str:
    """One row of polygon panels above one row of cycle panels."""
    cols = max(len(polygons), len(cycles), 1)
    rows = int(bool(polygons)) + int(bool(cycles))
    w, h = cols * PANEL, max(rows, 1) * PANEL
    body: list[str] = []
    for k, (title, poly) in enumerate(polygons):
        body += _polygon_group(poly, title, k * PANEL, 0)
    y = PANEL if polygons else 0
    for k, (title, cyc) in enumerate(cycles):
        body += _cycle_group(cyc, title, k * PANEL, y)
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
    return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"
