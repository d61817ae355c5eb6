"""SVG drawings of circle patterns by stereographic projection.

Pattern circles are drawn solid and interstice caps dashed.  By default the
sphere is first rotated so that a point deep inside the first interstice sits
at the projection pole; no drawn circle then passes through the pole and the
picture is bounded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .lorentz import MobiusMap, OrientedCircle, PlaneCircle, PlaneLine, stereographic, stereographic_point
from .patterns import CirclePattern

NORTH = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RenderStyle:
    width_px: int = 800
    circle_stroke: str = "#1f3b73"
    cap_stroke: str = "#b03a2e"
    project_from: str = "interstice"  # "interstice", "north" or "vertex-K"

    def __post_init__(self):
        if self.width_px <= 0:
            raise ValueError("width must be positive")
        if not re.fullmatch(r"interstice|north|vertex-\d+", self.project_from):
            raise ValueError(f"unknown projection pole {self.project_from!r}")


def _rotation_to_north(p: np.ndarray) -> MobiusMap:
    p = p / np.linalg.norm(p)
    axis = np.cross(p, NORTH)
    s = float(np.linalg.norm(axis))
    if s < 1e-15:
        return MobiusMap.identity() if p[2] > 0 else MobiusMap.rotation_about([1.0, 0.0, 0.0], math.pi)
    return MobiusMap.rotation_about(axis, math.atan2(s, float(p @ NORTH)))


def _outside_depth(p: CirclePattern, x: np.ndarray, skip: int = -1) -> float:
    """How far ``x`` is outside every pattern disk (positive means outside all)."""
    return min(
        (c.d - float(np.dot(c.n, x)) for i, c in enumerate(p.circles) if i != skip),
        default=1.0,
    )


def projection_pole(p: CirclePattern, choice: str = "interstice") -> np.ndarray:
    """Point of the sphere to be sent to the projection pole."""
    if choice == "north":
        return NORTH.copy()
    if choice.startswith("vertex-"):
        k = int(choice.split("-", 1)[1])
        if not 0 <= k < len(p.circles):
            raise ValueError(f"no circle {k}")
        # a point on circle k, as far from the other disks as possible
        samples = p.circles[k].sample(256)
        return max(samples, key=lambda x: _outside_depth(p, x, skip=k))
    if p.caps:
        cap = p.caps[0]
        # candidates fill the cap disk; keep the one deepest in the interstice
        candidates = [np.asarray(cap.n, dtype=float)]
        for t in np.linspace(0.1, 0.95, 9):
            d = cap.d + (1.0 - cap.d) * (1.0 - t)
            candidates.extend(OrientedCircle(cap.n, min(d, 1.0 - 1e-9)).sample(48))
        def depth(y):
            x = y / np.linalg.norm(y)
            return min(_outside_depth(p, x), float(np.dot(cap.n, x)) - cap.d)

        start = max(candidates, key=depth)
        # the interstice can be thin; polish the best sample
        best = minimize(lambda y: -depth(y), start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        x = best.x / np.linalg.norm(best.x)
        return x if depth(x) >= depth(start) else start
    if p.points:
        # an ideal pattern: the point itself is the whole interstice
        return np.asarray(p.points[0], dtype=float)
    return NORTH.copy()


def render_svg(p: CirclePattern, style: RenderStyle = RenderStyle()) -> str:
    pole = projection_pole(p, style.project_from)
    move = _rotation_to_north(pole)
    moved = p.transformed(move)
    shapes = [(stereographic(c), "cap") for c in moved.caps] + [(stereographic(c), "circle") for c in moved.circles]
    # an ideal point sent to the pole has no image
    dots = [stereographic_point(x) for x in moved.points if x[2] < 1.0 - 1e-12]

    boxes = [(s.center[0] - s.radius, s.center[1] - s.radius, s.center[0] + s.radius, s.center[1] + s.radius)
             for s, _ in shapes if isinstance(s, PlaneCircle)]
    boxes += [(x, y, x, y) for x, y in dots]
    if boxes:
        x0, y0 = min(b[0] for b in boxes), min(b[1] for b in boxes)
        x1, y1 = max(b[2] for b in boxes), max(b[3] for b in boxes)
    else:
        x0, y0, x1, y1 = -2.0, -2.0, 2.0, 2.0
    span = max(x1 - x0, y1 - y0, 1e-9)
    margin = 0.04 * span
    x0, y0, x1, y1 = x0 - margin, y0 - margin, x1 + margin, y1 + margin
    scale = style.width_px / (x1 - x0)
    height = max(1, int(math.ceil((y1 - y0) * scale)))

    def tx(x: float) -> float:
        return (x - x0) * scale

    def ty(y: float) -> float:
        return (y1 - y) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width_px}" height="{height}" '
        f'viewBox="0 0 {style.width_px} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    stroke = max(1.0, style.width_px / 500)
    for shape, kind in shapes:
        color = style.cap_stroke if kind == "cap" else style.circle_stroke
        attrs = f'fill="none" stroke="{color}" stroke-width="{stroke:.2f}"'
        if kind == "cap":
            attrs += f' stroke-dasharray="{3 * stroke:.2f} {2 * stroke:.2f}"'
        if isinstance(shape, PlaneCircle):
            out.append(
                f'<circle class="{kind}" cx="{tx(shape.center[0]):.4f}" cy="{ty(shape.center[1]):.4f}" '
                f'r="{shape.radius * scale:.4f}" {attrs}/>'
            )
        else:
            out.append(_line(shape, tx, ty, 4 * span, kind, attrs))
    for x, y in dots:
        out.append(f'<circle class="point" cx="{tx(x):.4f}" cy="{ty(y):.4f}" r="{2 * stroke:.2f}" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _line(shape: PlaneLine, tx, ty, reach: float, kind: str, attrs: str) -> str:
    (px, py), (dx, dy) = shape.point, shape.direction
    a = (px - reach * dx, py - reach * dy)
    b = (px + reach * dx, py + reach * dy)
    return (
        f'<line class="{kind}" x1="{tx(a[0]):.4f}" y1="{ty(a[1]):.4f}" '
        f'x2="{tx(b[0]):.4f}" y2="{ty(b[1]):.4f}" {attrs}/>'
    )
