"""Static SVG scene: obstacles, target window segments, depot and agent path."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .model import Instance, Solution

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _bounds(inst: Instance, sol: Optional[Solution]):
    xs = [inst.depot[0]]
    ys = [inst.depot[1]]
    for w in inst.windows():
        xs += [w.p0[0], w.p_end[0]]
        ys += [w.p0[1], w.p_end[1]]
    b = inst.obstacles.bounds()
    if b:
        xs += [b[0], b[2]]
        ys += [b[1], b[3]]
    if inst.grid is not None:
        xs += [0.0, inst.grid.width]
        ys += [0.0, inst.grid.height]
    if sol is not None:
        for _, p in sol.trajectory.waypoints:
            xs.append(p[0])
            ys.append(p[1])
    pad = 0.05 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    return min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad


def render_svg(inst: Instance, sol: Optional[Solution] = None, width: int = 600) -> str:
    x0, y0, x1, y1 = _bounds(inst, sol)
    k = width / (x1 - x0)
    height = int(round((y1 - y0) * k))

    def xy(p):
        return f"{(p[0] - x0) * k:.2f}", f"{(y1 - p[1]) * k:.2f}"

    def pt(p):
        return ",".join(xy(p))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for poly in inst.obstacles.polygons:
        d = " ".join(f"M {' L '.join(pt(p) for p in loop)} Z" for loop in poly.loops())
        out.append(f'<path d="{d}" fill="#555" fill-rule="evenodd" stroke="none"/>')
    for i, wins in enumerate(inst.targets, start=1):
        color = PALETTE[(i - 1) % len(PALETTE)]
        for j, w in enumerate(wins):
            title = escape(f"target {i} window {j}: [{w.t0:g}, {w.tf:g}]")
            (ax, ay), (bx, by) = xy(w.p0), xy(w.p_end)
            out.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="{color}" '
                       f'stroke-width="3"><title>{title}</title></line>')
            out.append(f'<circle cx="{bx}" cy="{by}" r="3" fill="{color}"/>')
    if sol is not None and len(sol.trajectory) > 1:
        pts = " ".join(pt(p) for _, p in sol.trajectory.waypoints)
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5" '
                   f'stroke-dasharray="4 2"/>')
        for ic in sol.window_sequence:
            cx, cy = xy(sol.trajectory.position(ic.time))
            out.append(f'<circle cx="{cx}" cy="{cy}" r="4" fill="none" stroke="black"/>')
    cx, cy = xy(inst.depot)
    out.append(f'<rect x="{float(cx) - 5:.2f}" y="{float(cy) - 5:.2f}" width="10" height="10" '
               f'fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
