"""Minimal SVG Gantt chart of a schedule: one lane per node, communication qubits stacked."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .schedule import Timeline

COLORS = {"epr": "#9ecae1", "tele": "#fd8d3c", "ent": "#74c476", "dis": "#31a354",
          "body": "#bcbddc", "gate": "#d9d9d9"}
LANE = 22
LEFT = 60


def to_svg(tl: Timeline, width: int = 1000) -> str:
    lanes = max(tl.num_nodes, 1)
    scale = (width - LEFT - 10) / tl.makespan if tl.makespan > 0 else 1.0
    height = lanes * LANE * 2 + 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="monospace" font-size="10">']
    for n in range(lanes):
        y = 10 + n * LANE * 2
        out.append(f'<text x="4" y="{y + LANE}">node {n}</text>')
        out.append(f'<line x1="{LEFT}" y1="{y + 2 * LANE - 1}" x2="{width - 10}" '
                   f'y2="{y + 2 * LANE - 1}" stroke="#eee"/>')
    # claims fill the lower half of each lane, events the upper half
    for cl in tl.claims:
        y = 10 + cl.node * LANE * 2 + LANE
        x = LEFT + cl.start * scale
        w = max((cl.end - cl.start) * scale, 0.5)
        out.append(f'<rect x="{x:.2f}" y="{y}" width="{w:.2f}" height="{LANE - 4}" '
                   f'fill="#fcbba1" fill-opacity="0.4" stroke="#cb181d" stroke-width="0.3"/>')
    for e in tl.events:
        if not e.nodes:
            continue
        x = LEFT + e.start * scale
        w = max(e.duration * scale, 0.5)
        for n in sorted(set(e.nodes)):
            y = 10 + n * LANE * 2
            out.append(f'<rect x="{x:.2f}" y="{y}" width="{w:.2f}" height="{LANE - 4}" '
                       f'fill="{COLORS.get(e.kind, "#999")}" stroke="#333" stroke-width="0.3">'
                       f'<title>{escape(e.label)} {e.kind} [{e.start:g}, {e.end:g}]</title></rect>')
    out.append(f'<text x="{LEFT}" y="{height - 6}">makespan {tl.makespan:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(tl: Timeline, path: str) -> None:
    with open(path, "w") as f:
        f.write(to_svg(tl))
