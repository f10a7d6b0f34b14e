"""Static SVG scatter of a labeled projection.

Output is plain text built deterministically, so identical results give
identical files.  Elements carry classes for inspection: ``rect.cell``
(in-ball lattice cells), ``circle.point`` (data points, with a
``data-cluster`` attribute) and ``circle.sv`` (support-vector rings).
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["to_svg", "save_svg", "PALETTE"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173")
UNCLUSTERED = "#7f7f7f"
SIZE = 600
MARGIN = 40


def _colour(cid):
    return UNCLUSTERED if cid == 0 else PALETTE[(cid - 1) % len(PALETTE)]


def to_svg(result, grid: bool = True, title: str | None = None) -> str:
    """SVG text for an :class:`~svcgrid.pipeline.SvcResult`.

    Parameters
    ----------
    grid : bool
        Shade lattice cells inside the ball (grid labeler results only).
    """
    proj = result.projection
    box = proj.min_max
    span = box[:, 1] - box[:, 0]
    inner = SIZE - 2 * MARGIN

    def px(xy):
        u = (np.asarray(xy, dtype=float) - box[:, 0]) / span
        return MARGIN + u[..., 0] * inner, SIZE - MARGIN - u[..., 1] * inner

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">']
    label = title or f"{result.assignment.n_clusters} clusters, {result.assignment.unclassified} unclustered"
    out.append(f"<title>{escape(label)}</title>")
    out.append(f'<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" '
               f'fill="none" stroke="#cccccc"/>')

    gl = result.grid_labeling
    if grid and gl is not None:
        w, h = inner / gl.grid.g, inner / gl.grid.g
        out.append('<g class="grid">')
        for a, b in np.argwhere(gl.num_points > 0):
            x = MARGIN + a * w
            y = SIZE - MARGIN - (b + 1) * h
            cid = int(gl.num_points[a, b])
            out.append(f'<rect class="cell" data-cluster="{cid}" x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" '
                       f'height="{h:.2f}" fill="{_colour(cid)}" fill-opacity="0.15"/>')
        out.append("</g>")

    xs, ys = px(proj.coords)
    labels = result.assignment.class_points
    out.append('<g class="points">')
    for i, (x, y) in enumerate(zip(xs, ys)):
        cid = int(labels[i])
        out.append(f'<circle class="point" data-cluster="{cid}" cx="{x:.2f}" cy="{y:.2f}" r="3" '
                   f'fill="{_colour(cid)}"><title>{escape(result.names[i])}</title></circle>')
    out.append("</g>")

    out.append('<g class="support-vectors">')
    for i in result.model.sv_indices:
        out.append(f'<circle class="sv" cx="{xs[i]:.2f}" cy="{ys[i]:.2f}" r="6" fill="none" '
                   f'stroke="#000000" stroke-width="1"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(result, path, grid: bool = True, title: str | None = None) -> Path:
    path = Path(path)
    path.write_text(to_svg(result, grid, title), encoding="utf-8")
    return path
