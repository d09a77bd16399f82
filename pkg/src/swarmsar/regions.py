"""Planar regions shared by the scene, intent, planner and no-fly machinery.

A region is either a circle or an axis-aligned rectangle in world
coordinates (meters).  Rectangles are stored corner-to-corner; ``x0,y0`` is
allowed to be any corner so sweep generators can encode a start corner.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.cx, y - self.cy) <= self.r

    def to_dict(self) -> dict:
        return {"shape": "circle", "cx": self.cx, "cy": self.cy, "r": self.r}


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def xmin(self) -> float:
        return min(self.x0, self.x1)

    @property
    def xmax(self) -> float:
        return max(self.x0, self.x1)

    @property
    def ymin(self) -> float:
        return min(self.y0, self.y1)

    @property
    def ymax(self) -> float:
        return max(self.y0, self.y1)

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def to_dict(self) -> dict:
        return {"shape": "rect", "x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1}


Region = Circle | Rect


def region_from_dict(d: dict) -> Region:
    shape = d.get("shape")
    if shape == "circle":
        return Circle(float(d["cx"]), float(d["cy"]), float(d["r"]))
    if shape == "rect":
        return Rect(float(d["x0"]), float(d["y0"]), float(d["x1"]), float(d["y1"]))
    raise ValueError(f"unknown region shape: {shape!r}")


QUADRANTS = ("northwest", "northeast", "southwest", "southeast")


def zone_quadrant(zone_cx: float, zone_cy: float, zone_r: float, name: str) -> Rect:
    """Quadrant of the zone's bounding square; north = +y, east = +x."""
    name = name.lower()
    if name not in QUADRANTS:
        raise ValueError(f"unknown quadrant: {name!r}")
    x0 = zone_cx - zone_r if "west" in name else zone_cx
    y0 = zone_cy if "north" in name else zone_cy - zone_r
    return Rect(x0, y0, x0 + zone_r, y0 + zone_r)


_CIRCLE_RE = re.compile(
    r"circle\s*\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*(?:,\s*(-?[\d.]+)\s*)?,\s*(-?[\d.]+)\s*\)",
    re.IGNORECASE,
)
_RECT_RE = re.compile(
    r"rect\s*\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\)",
    re.IGNORECASE,
)
_QUADRANT_RE = re.compile(
    r"\b(north\s*-?\s*west|north\s*-?\s*east|south\s*-?\s*west|south\s*-?\s*east|nw|ne|sw|se)\b"
    r"(?:\s+quadrant)?",
    re.IGNORECASE,
)
_QUADRANT_ALIASES = {
    "nw": "northwest", "ne": "northeast", "sw": "southwest", "se": "southeast",
}


def parse_geometry_phrases(
    text: str, zone_cx: float, zone_cy: float, zone_r: float
) -> list[Region]:
    """Geometry named in free text: circle(x,y[,z],r), rect(x0,y0,x1,y1),
    or a named quadrant of the zone's bounding square."""
    out: list[Region] = []
    for m in _CIRCLE_RE.finditer(text):
        x, y, _z, r = m.groups()
        out.append(Circle(float(x), float(y), float(r)))
    for m in _RECT_RE.finditer(text):
        x0, y0, x1, y1 = (float(v) for v in m.groups())
        out.append(Rect(x0, y0, x1, y1))
    for m in _QUADRANT_RE.finditer(text):
        name = re.sub(r"[\s-]", "", m.group(1).lower())
        name = _QUADRANT_ALIASES.get(name, name)
        out.append(zone_quadrant(zone_cx, zone_cy, zone_r, name))
    return out


def segment_intersects_circle_2d(
    ax: float, ay: float, bx: float, by: float, circle: Circle
) -> bool:
    """True when segment A-B passes within circle.r of the circle center."""
    return _point_segment_dist_2d(circle.cx, circle.cy, ax, ay, bx, by) <= circle.r


def _point_segment_dist_2d(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> float:
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segment_intersects_rect_2d(
    ax: float, ay: float, bx: float, by: float, rect: Rect
) -> bool:
    """Segment-vs-axis-aligned-rectangle overlap test (slab clipping)."""
    if rect.contains(ax, ay) or rect.contains(bx, by):
        return True
    t0, t1 = 0.0, 1.0
    dx, dy = bx - ax, by - ay
    for p, d, lo, hi in (
        (ax, dx, rect.xmin, rect.xmax),
        (ay, dy, rect.ymin, rect.ymax),
    ):
        if d == 0.0:
            if p < lo or p > hi:
                return False
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
            if t0 > t1:
                return False
    return True
