"""SVG rendering of network states: resistance maps and current maps.

Edges are colored on a continuous scale between the unit OFF value (pale
blue-gray) and the unit ON value (red); terminals and cities are drawn as
large yellow circles. The current variant colors and widens edges by
|current| relative to the maximum. Output is deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import SourceSpec, solve_dc
from .snapshots import network_from_snapshot

OFF_COLOR = (176, 196, 222)
ON_COLOR = (220, 20, 20)
SCALE = 24.0
MARGIN = 1.5


def _lerp_color(t: float) -> str:
    r = round(ON_COLOR[0] + (OFF_COLOR[0] - ON_COLOR[0]) * t)
    g = round(ON_COLOR[1] + (OFF_COLOR[1] - ON_COLOR[1]) * t)
    b = round(ON_COLOR[2] + (OFF_COLOR[2] - ON_COLOR[2]) * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_network(snapshot: dict, out_path, mode: str = "resistance") -> None:
    """Write an SVG for a state snapshot.

    mode "resistance" colors each unit by its memristance on a log scale
    between the unit limits; mode "current" solves the DC operating point
    using the snapshot's embedded sources and maps |edge current|.
    """
    if mode not in ("resistance", "current"):
        raise ValueError(f"unknown render mode {mode!r}")
    net = network_from_snapshot(snapshot)
    p = net.params
    xs = [n.position[0] for n in net.nodes.values()]
    ys = [n.position[1] for n in net.nodes.values()]
    x0, y0 = min(xs) - MARGIN, min(ys) - MARGIN
    w = (max(xs) - min(xs) + 2 * MARGIN) * SCALE
    h = (max(ys) - min(ys) + 2 * MARGIN) * SCALE

    def xy(nid):
        px, py = net.nodes[nid].position
        return (px - x0) * SCALE, (py - y0) * SCALE

    currents = None
    if mode == "current":
        src = snapshot.get("sources")
        if not src:
            raise ValueError("current map needs a snapshot with sources")
        spec = SourceSpec.pair(int(src["input"]), int(src["output"]),
                               float(src["amplitude"]))
        currents = solve_dc(net, spec).edge_currents
        peak = max(abs(c) for c in currents.values()) or 1.0

    lo = math.log(p.unit_r_on)
    hi = math.log(p.unit_r_off)
    lines = []
    for eid in net.edge_ids():
        e = net.edges[eid]
        (ax, ay), (bx, by) = xy(e.u), xy(e.v)
        if mode == "resistance":
            r = 1.0 / (1.0 / e.unit.device_a.x + 1.0 / e.unit.device_b.x)
            t = min(max((math.log(r) - lo) / (hi - lo), 0.0), 1.0)
            color = _lerp_color(t)
            width = 1.5 + 2.5 * (1.0 - t)
        else:
            t = abs(currents[eid]) / peak
            color = _lerp_color(1.0 - t)
            width = 0.8 + 4.0 * t
        lines.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" '
                     f'stroke="{color}" stroke-width="{width:.2f}"/>')

    circles = [f'<circle cx="{xy(nid)[0]:.2f}" cy="{xy(nid)[1]:.2f}" r="2.2" fill="#555"/>'
               for nid in net.node_ids()]
    marks = []
    src = snapshot.get("sources") or {}
    special = [src.get("input"), src.get("output")] + list(src.get("cities", []))
    for nid in special:
        if nid is None or nid not in net.nodes:
            continue
        cx, cy = xy(nid)
        marks.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="7" fill="#ffd700" '
                     f'stroke="#806000" stroke-width="1.5"/>')

    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
           f'viewBox="0 0 {w:.2f} {h:.2f}">',
           f'<rect width="{w:.2f}" height="{h:.2f}" fill="white"/>']
    svg += lines + circles + marks + ["</svg>"]
    with open(out_path, "w") as fh:
        fh.write("\n".join(svg) + "\n")
