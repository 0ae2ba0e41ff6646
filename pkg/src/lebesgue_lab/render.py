"""Deterministic SVG drawings of planar decompositions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import Decomposition, adjacency_graph, color

PALETTE = ("#e8c468", "#6fa8dc", "#93c47d", "#e06666", "#b4a7d6", "#f6b26b", "#76a5af", "#c27ba0")


@dataclass
class RenderSpec:
    decomposition: Decomposition
    window: Optional[tuple] = None  # ((x0, y0), (x1, y1))
    stroke_width: float = 1.0
    coloring: Optional[dict] = None
    size: int = 512
    adjacency_h: float = 1e-2
    adjacency_delta: float = 1e-9

    def resolved_window(self) -> tuple:
        lo, hi = self.decomposition.domain.bounds()
        if self.window is None:
            return tuple(map(float, lo)), tuple(map(float, hi))
        (x0, y0), (x1, y1) = self.window
        if x0 > lo[0] or y0 > lo[1] or x1 < hi[0] or y1 < hi[1]:
            raise ValueError("window must contain the domain")
        return (float(x0), float(y0)), (float(x1), float(y1))

    def resolved_coloring(self) -> dict:
        if self.coloring is not None:
            return self.coloring
        graph = adjacency_graph(self.decomposition, self.adjacency_h, self.adjacency_delta)
        return color(graph)[0]


def _path(loops, to_px) -> str:
    parts = []
    for loop in loops:
        px = to_px(np.asarray(loop, float))
        parts.append("M " + " L ".join(f"{x:.4f} {y:.4f}" for x, y in px) + " Z")
    return " ".join(parts)


def render_svg(spec: RenderSpec) -> str:
    d = spec.decomposition
    if d.dimension != 2:
        raise ValueError("render supports 2D only")
    (x0, y0), (x1, y1) = spec.resolved_window()
    scale = spec.size / max(x1 - x0, y1 - y0)
    width, height = (x1 - x0) * scale, (y1 - y0) * scale

    def to_px(p):
        return np.column_stack([(p[:, 0] - x0) * scale, (y1 - p[:, 1]) * scale])

    coloring = spec.resolved_coloring()
    window = ((x0, y0), (x1, y1))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.4f}" height="{height:.4f}" '
        f'viewBox="0 0 {width:.4f} {height:.4f}">',
        f'<rect x="0" y="0" width="{width:.4f}" height="{height:.4f}" fill="#ffffff"/>',
    ]
    if d.domain.kind == "ball":
        c = to_px(np.zeros((1, 2)))[0]
        out.append(f'<clipPath id="domain"><circle cx="{c[0]:.4f}" cy="{c[1]:.4f}" '
                   f'r="{d.domain.scale * scale:.4f}"/></clipPath>')
        out.append('<g clip-path="url(#domain)">')
    else:
        out.append("<g>")
    for p in d.pieces:
        fill = PALETTE[coloring.get(p.id, 0) % len(PALETTE)]
        out.append(f'<path id="piece-{p.id}" d="{_path(p.outline_2d(window), to_px)}" fill="{fill}" '
                   f'fill-rule="evenodd" stroke="#000000" stroke-width="{spec.stroke_width:.4f}"/>')
    out.append("</g>")
    probes = d.domain_probes()
    if len(probes):
        out.append('<g fill="#000000">')
        for x, y in to_px(probes):
            out.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="{1.5 * spec.stroke_width:.4f}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
