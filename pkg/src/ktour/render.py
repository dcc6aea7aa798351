"""SVG pictures of instances, solutions and the location grid.

Element conventions (tests count on them): grid circles are ``<circle>``,
rays are ``<line>``, each tour is one ``<path>``, points are ``<rect>``,
the depot is a ``<polygon>`` and ring shading uses stroked ``<ellipse>``.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import numpy as np

from .discretize import discretize
from .model import Instance, Solution
from .rings import build_rings, select_marking

MAX_RAY_LABELS = 64
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _f(x: float) -> str:
    return f"{x:.6g}"


def render_svg(instance: Instance, solution: Solution | None = None,
               show_grid: bool = False, eps: float = 0.5, size: int = 800) -> str:
    o = np.asarray(instance.origin)
    rel = instance.points - o
    L = float(np.hypot(*rel.T).max()) if instance.n else 0.0
    R = max(L, 1e-9) * 1.08 if L > 0 else 1.0
    unit = 2 * R / size

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(size), height=str(size),
                     viewBox=f"{_f(-R)} {_f(-R)} {_f(2 * R)} {_f(2 * R)}")
    ET.SubElement(svg, "rect", x=_f(-R), y=_f(-R), width=_f(2 * R), height=_f(2 * R),
                  fill="white", **{"class": "background"})
    # y axis points up in the drawing
    root = ET.SubElement(svg, "g", transform="scale(1,-1)")

    if show_grid and instance.n and L > 0:
        snapped = discretize(instance, eps)
        grid = snapped.grid
        radii = grid.radii
        gg = ET.SubElement(root, "g", **{"class": "grid"})
        layout = build_rings(grid, eps)
        marked = select_marking(snapped, layout, eps).partition.marked if len(snapped.kept) else set()
        for j in range(layout.ring_count):
            cs = layout.circles(j)
            r_in, r_out = radii[cs[0]], radii[cs[-1]]
            is_marked = j in marked
            ET.SubElement(gg, "ellipse", cx="0", cy="0", rx=_f((r_in + r_out) / 2), ry=_f((r_in + r_out) / 2),
                          fill="none", stroke="#999999" if is_marked else ("#f2f2f2" if j % 2 else "#fafafa"),
                          **{"stroke-width": _f(max(r_out - r_in, unit)), "stroke-opacity": "0.5",
                             "class": "ring marked-ring" if is_marked else "ring"})
        for rad in radii:
            ET.SubElement(gg, "circle", cx="0", cy="0", r=_f(rad), fill="none", stroke="#bbbbbb",
                          **{"stroke-width": _f(unit * 0.5), "class": "grid-circle"})
        outer = radii[-1]
        for j in range(grid.ray_count):
            a = j * grid.ray_step
            ET.SubElement(gg, "line", x1="0", y1="0", x2=_f(outer * math.cos(a)), y2=_f(outer * math.sin(a)),
                          stroke="#cccccc", **{"stroke-width": _f(unit * 0.5), "class": "grid-ray"})
        if grid.ray_count <= MAX_RAY_LABELS:
            for j in range(grid.ray_count):
                a = j * grid.ray_step
                t = ET.SubElement(gg, "text", x=_f(outer * 1.02 * math.cos(a)), y=_f(-outer * 1.02 * math.sin(a)),
                                  transform="scale(1,-1)", **{"font-size": _f(unit * 10), "class": "ray-label"})
                t.text = str(j)

    if solution is not None:
        tg = ET.SubElement(root, "g", **{"class": "tours"})
        for i, tour in enumerate(solution.tours):
            pts = [(0.0, 0.0)] + [tuple(rel[p]) for p in tour] + [(0.0, 0.0)]
            d = "M " + " L ".join(f"{_f(x)} {_f(y)}" for x, y in pts)
            ET.SubElement(tg, "path", d=d, fill="none", stroke=PALETTE[i % len(PALETTE)],
                          **{"stroke-width": _f(unit * 1.5), "class": "tour"})

    pg = ET.SubElement(root, "g", **{"class": "points"})
    h = unit * 2.5
    for x, y in rel.tolist():
        ET.SubElement(pg, "rect", x=_f(x - h), y=_f(y - h), width=_f(2 * h), height=_f(2 * h),
                      fill="black", **{"class": "point"})
    dh = unit * 6
    ET.SubElement(root, "polygon", points=f"0,{_f(dh)} {_f(dh)},0 0,{_f(-dh)} {_f(-dh)},0",
                  fill="red", **{"class": "depot"})
    return ET.tostring(svg, encoding="unicode") + "\n"

