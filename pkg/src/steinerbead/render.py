"""Deterministic SVG rendering of embedded trees.

Conventions: 100 SVG units per unit of distance, terminals as filled
circles (8px), Steiner points as open circles (6px), beads as small dots
(3px), and for polygonal norms a unit-ball inset in the top-right corner.
Elements are emitted in a fixed order (edges, then nodes sorted by label,
then beads sorted by coordinates) and all numbers are formatted with four
decimals, so a given tree always renders to identical bytes.
"""
from __future__ import annotations

from .tree_core import EmbeddedTree, bead_positions

SCALE = 100.0
PAD = 40.0
TERMINAL_RADIUS = 8.0
STEINER_RADIUS = 6.0
BEAD_RADIUS = 3.0
INSET_RADIUS = 45.0
INSET_MARGIN = 12.0

_HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
    'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
)


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def render_svg(tree: EmbeddedTree, *, show_beads: bool = True) -> str:
    """Render a tree to an SVG 1.1 document (returned as a string)."""
    top = tree.topology
    pos = tree.positions
    beads = bead_positions(tree) if show_beads else []

    xs = [p.x for p in pos.values()] + [b[0] for b in beads]
    ys = [p.y for p in pos.values()] + [b[1] for b in beads]
    minx, maxx = min(xs), max(xs)
    miny, maxy = min(ys), max(ys)

    inset = None if tree.norm.is_euclidean else tree.norm.vertices
    inset_w = 2 * (INSET_RADIUS + INSET_MARGIN) if inset else 0.0
    width = (maxx - minx) * SCALE + 2 * PAD + inset_w
    height = max((maxy - miny) * SCALE + 2 * PAD, inset_w)

    def sx(x: float) -> float:
        return (x - minx) * SCALE + PAD

    def sy(y: float) -> float:
        return (maxy - y) * SCALE + PAD

    parts = [_HEADER.format(w=_fmt(width), h=_fmt(height))]

    parts.append('<g stroke="#333333" stroke-width="2" fill="none">\n')
    for a, b in sorted(tuple(sorted(e)) for e in top.edges):
        pa, pb = pos[a], pos[b]
        parts.append(
            f'<line x1="{_fmt(sx(pa.x))}" y1="{_fmt(sy(pa.y))}" '
            f'x2="{_fmt(sx(pb.x))}" y2="{_fmt(sy(pb.y))}"/>\n'
        )
    parts.append("</g>\n")

    terminal_set = set(top.terminals)
    parts.append('<g stroke="#000000" stroke-width="1.5">\n')
    for lab in sorted(pos):
        p = pos[lab]
        if lab in terminal_set:
            parts.append(
                f'<circle cx="{_fmt(sx(p.x))}" cy="{_fmt(sy(p.y))}" '
                f'r="{_fmt(TERMINAL_RADIUS)}" fill="#000000"/>\n'
            )
        else:
            parts.append(
                f'<circle cx="{_fmt(sx(p.x))}" cy="{_fmt(sy(p.y))}" '
                f'r="{_fmt(STEINER_RADIUS)}" fill="#ffffff"/>\n'
            )
    parts.append("</g>\n")

    if beads:
        parts.append('<g fill="#555555" class="beads">\n')
        for b in sorted((round(b[0], 9), round(b[1], 9)) for b in beads):
            parts.append(
                f'<circle cx="{_fmt(sx(b[0]))}" cy="{_fmt(sy(b[1]))}" r="{_fmt(BEAD_RADIUS)}"/>\n'
            )
        parts.append("</g>\n")

    if inset:
        cx = width - INSET_MARGIN - INSET_RADIUS
        cy = INSET_MARGIN + INSET_RADIUS
        pts = " ".join(
            f"{_fmt(cx + INSET_RADIUS * v.x)},{_fmt(cy - INSET_RADIUS * v.y)}" for v in inset
        )
        parts.append(
            '<g class="unit-ball" stroke="#888888" stroke-width="1" fill="none">\n'
            f'<polygon points="{pts}"/>\n'
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="1.5" fill="#888888" stroke="none"/>\n'
            "</g>\n"
        )

    parts.append("</svg>\n")
    return "".join(parts)
