"""Static SVG figures of a curve and its inscribed squares.

Output is plain text built with fixed-precision formatting, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .constructions import locus
from .curve import INV_SQRT2, Curve
from .solver import Square

CURVE_SAMPLES = 2048

_HEADER = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="{x0:.4f} {y0:.4f} {w:.4f} {w:.4f}">
<g transform="scale(1,-1)">
"""
_FOOTER = "</g>\n</svg>\n"


def _pts(P) -> str:
    return " ".join(f"{x:.6f},{y:.6f}" for x, y in P)


def render_svg(curve: Curve, squares: list[Square] = (), show_locus: bool = False, size: int = 600) -> str:
    """SVG with the curve, the reference unit circle and the squares overlaid.

    The y axis points up (the group is flipped), as in ordinary math plots.
    """
    P = curve.eval(np.arange(CURVE_SAMPLES) / CURVE_SAMPLES)
    extent = max(1.0, float(np.abs(P).max())) * 1.1
    stroke = 2 * extent / size
    out = [_HEADER.format(size=size, x0=-extent, y0=-extent, w=2 * extent)]
    out.append(
        f'<circle class="reference" cx="0" cy="0" r="1" fill="none" stroke="#bbbbbb" '
        f'stroke-width="{stroke:.6f}" stroke-dasharray="{4 * stroke:.6f}"/>\n'
    )
    d = "M " + " L ".join(f"{x:.6f} {y:.6f}" for x, y in P) + " Z"
    out.append(f'<path class="curve" d="{d}" fill="none" stroke="#000000" stroke-width="{1.5 * stroke:.6f}"/>\n')
    if show_locus:
        x = np.linspace(-INV_SQRT2, INV_SQRT2, 401)
        L = np.column_stack([x, locus(x)])
        out.append(
            f'<polyline class="locus" points="{_pts(L)}" fill="none" stroke="#2a7ab0" '
            f'stroke-width="{stroke:.6f}"/>\n'
        )
    colors = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
    for k, sq in enumerate(squares):
        color = colors[k % len(colors)]
        out.append(
            f'<polygon class="square" points="{_pts(sq.vertices)}" fill="none" stroke="{color}" '
            f'stroke-width="{stroke:.6f}"/>\n'
        )
    out.append(_FOOTER)
    return "".join(out)
