"""Seeded generation of randomized disaster scenes.

World frame: meters, origin at the base station, x east / y north / z up.
The operations area is a square of half-extent 1000 m centered on the base.
The disaster zone is a disk of radius 500 m whose center lies more than
600 m from the base but still keeps the disk inside the area.

Randomness comes from one ``random.Random`` (Mersenne Twister) stream per
scene, consumed in a fixed, documented order so a given seed always yields
the same scene:

1. zone center: repeat (uniform x in [-500,500], uniform y in [-500,500])
   until ||center|| > 600
2. obstacle count (randint 5..10) unless overridden
3. per obstacle, in order: kind (choice of cube/cylinder/wall), height
   (uniform 10..45), kind extents (cube: side 10..40; cylinder: radius
   5..20; wall: length 20..80 then yaw 0..2pi), then position as
   (radial fraction, angle) uniform over the disk shrunk by the footprint
   circumradius
4. survivor count (randint 1..5) unless overridden, then per survivor a
   disk position (re-drawn while inside an obstacle footprint) and a
   thermal signature (uniform 0.8..1.0)
5. wind-zone count (randint 0..2) unless overridden, then per zone a disk
   position, altitude (uniform 20..80), radius (uniform 50..100), speed
   (uniform 10..15), direction (uniform 0..2pi, unused by the hazard
   rules) and spawn time (uniform 60..300, re-drawn while not > 60)

Count overrides skip the corresponding count draw but leave the rest of
the order unchanged.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .errors import RangeError, SceneFormatError

AREA_HALF_EXTENT = 1000.0
ZONE_RADIUS = 500.0
ZONE_MIN_DIST = 600.0
BASE = (0.0, 0.0, 0.0)

OBSTACLE_COUNT_RANGE = (5, 10)
SURVIVOR_COUNT_RANGE = (1, 5)
WIND_COUNT_RANGE = (0, 2)
OBSTACLE_HEIGHT_RANGE = (10.0, 45.0)
CUBE_SIDE_RANGE = (10.0, 40.0)
CYLINDER_RADIUS_RANGE = (5.0, 20.0)
WALL_LENGTH_RANGE = (20.0, 80.0)
WALL_THICKNESS = 2.0
SIGNATURE_RANGE = (0.8, 1.0)
WIND_RADIUS_RANGE = (50.0, 100.0)
WIND_SPEED_RANGE = (10.0, 15.0)
WIND_ALTITUDE_RANGE = (20.0, 80.0)
WIND_SPAWN_MAX = 300.0

OBSTACLE_KINDS = ("cube", "cylinder", "wall")


@dataclass(frozen=True)
class DisasterZone:
    center: tuple[float, float]
    radius: float = ZONE_RADIUS

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius

    def bounding_square(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class Obstacle:
    """A vertical prism obstacle (footprint extruded from ground to height)."""

    id: str
    kind: str
    center: tuple[float, float]
    height: float
    side: float | None = None       # cube
    radius: float | None = None     # cylinder
    length: float | None = None     # wall
    thickness: float | None = None  # wall
    yaw: float | None = None        # wall, radians

    def footprint_circumradius(self) -> float:
        if self.kind == "cube":
            return self.side * math.sqrt(2.0) / 2.0
        if self.kind == "cylinder":
            return self.radius
        return math.hypot(self.length / 2.0, self.thickness / 2.0)

    def _local(self, x: float, y: float) -> tuple[float, float]:
        dx, dy = x - self.center[0], y - self.center[1]
        if self.kind == "wall":
            c, s = math.cos(-self.yaw), math.sin(-self.yaw)
            return (dx * c - dy * s, dx * s + dy * c)
        return (dx, dy)

    def _half_extents(self) -> tuple[float, float]:
        if self.kind == "cube":
            return (self.side / 2.0, self.side / 2.0)
        return (self.length / 2.0, self.thickness / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        if self.kind == "cylinder":
            dx, dy = self._local(x, y)
            return math.hypot(dx, dy) <= self.radius
        lx, ly = self._local(x, y)
        hx, hy = self._half_extents()
        return abs(lx) <= hx and abs(ly) <= hy

    def horizontal_clearance(self, x: float, y: float) -> float:
        """Distance from (x, y) to the footprint boundary; 0 inside."""
        if self.kind == "cylinder":
            dx, dy = self._local(x, y)
            return max(0.0, math.hypot(dx, dy) - self.radius)
        lx, ly = self._local(x, y)
        hx, hy = self._half_extents()
        ex, ey = max(0.0, abs(lx) - hx), max(0.0, abs(ly) - hy)
        return math.hypot(ex, ey)

    def distance_to_solid(self, x: float, y: float, z: float) -> float:
        """3-D distance from a point to the obstacle solid; 0 inside."""
        dh = self.horizontal_clearance(x, y)
        dv = max(0.0, z - self.height)
        return math.hypot(dh, dv)

    def footprint_corners(self) -> list[tuple[float, float]]:
        """Corners of the footprint (rectangular kinds only)."""
        hx, hy = self._half_extents()
        yaw = self.yaw if self.kind == "wall" else 0.0
        c, s = math.cos(yaw), math.sin(yaw)
        cx, cy = self.center
        return [
            (cx + lx * c - ly * s, cy + lx * s + ly * c)
            for lx, ly in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy))
        ]

    def intersects_cell(self, xmin: float, ymin: float, xmax: float, ymax: float) -> bool:
        """True when the footprint overlaps the axis-aligned cell."""
        if self.kind == "cylinder":
            cx, cy = self.center
            nx = min(max(cx, xmin), xmax)
            ny = min(max(cy, ymin), ymax)
            return math.hypot(cx - nx, cy - ny) <= self.radius
        if self.kind == "cube":
            hx, hy = self._half_extents()
            cx, cy = self.center
            return not (
                cx + hx < xmin or cx - hx > xmax or cy + hy < ymin or cy - hy > ymax
            )
        # wall: separating-axis test between the OBB and the cell
        corners = self.footprint_corners()
        cell = [(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]
        axes = [(1.0, 0.0), (0.0, 1.0),
                (math.cos(self.yaw), math.sin(self.yaw)),
                (-math.sin(self.yaw), math.cos(self.yaw))]
        for ax, ay in axes:
            p0 = [c[0] * ax + c[1] * ay for c in corners]
            p1 = [c[0] * ax + c[1] * ay for c in cell]
            if max(p0) < min(p1) or max(p1) < min(p0):
                return False
        return True


@dataclass(frozen=True)
class Survivor:
    id: str
    position: tuple[float, float]
    signature: float


@dataclass(frozen=True)
class WindZone:
    """Spherical hazard volume that activates at spawn_time and stays active."""

    id: str
    center: tuple[float, float, float]
    radius: float
    wind_speed: float
    wind_dir: float
    spawn_time: float


@dataclass(frozen=True)
class Scene:
    seed: int
    zone: DisasterZone
    obstacles: tuple[Obstacle, ...]
    survivors: tuple[Survivor, ...]
    wind_zones: tuple[WindZone, ...]
    area_half_extent: float = AREA_HALF_EXTENT
    base: tuple[float, float, float] = BASE

    def obstacle_by_id(self, oid: str) -> Obstacle | None:
        return next((o for o in self.obstacles if o.id == oid), None)

    def survivor_by_id(self, sid: str) -> Survivor | None:
        return next((s for s in self.survivors if s.id == sid), None)

    def wind_zone_by_id(self, wid: str) -> WindZone | None:
        return next((w for w in self.wind_zones if w.id == wid), None)


def _check_count(name: str, value: int | None, lo: int, hi: int) -> int | None:
    if value is None:
        return None
    if not isinstance(value, int) or not lo <= value <= hi:
        raise RangeError(f"{name} override {value!r} outside allowed range [{lo}, {hi}]")
    return value


def _disk_point(rng: random.Random, cx: float, cy: float, r: float) -> tuple[float, float]:
    # uniform over the disk: radius via sqrt, then angle
    rr = r * math.sqrt(rng.random())
    th = rng.uniform(0.0, 2.0 * math.pi)
    return (cx + rr * math.cos(th), cy + rr * math.sin(th))


def generate_scene(
    seed: int,
    obstacle_count: int | None = None,
    survivor_count: int | None = None,
    wind_zone_count: int | None = None,
) -> Scene:
    """Generate the scene for ``seed``; identical seeds yield identical scenes."""
    obstacle_count = _check_count("obstacle_count", obstacle_count, *OBSTACLE_COUNT_RANGE)
    survivor_count = _check_count("survivor_count", survivor_count, *SURVIVOR_COUNT_RANGE)
    wind_zone_count = _check_count("wind_zone_count", wind_zone_count, *WIND_COUNT_RANGE)

    rng = random.Random(seed)

    while True:
        cx = rng.uniform(-ZONE_RADIUS, ZONE_RADIUS)
        cy = rng.uniform(-ZONE_RADIUS, ZONE_RADIUS)
        if math.hypot(cx, cy) > ZONE_MIN_DIST:
            break
    zone = DisasterZone((cx, cy))

    n_obs = obstacle_count if obstacle_count is not None else rng.randint(*OBSTACLE_COUNT_RANGE)
    obstacles = []
    for i in range(n_obs):
        kind = rng.choice(OBSTACLE_KINDS)
        height = rng.uniform(*OBSTACLE_HEIGHT_RANGE)
        side = radius = length = thickness = yaw = None
        if kind == "cube":
            side = rng.uniform(*CUBE_SIDE_RANGE)
            circum = side * math.sqrt(2.0) / 2.0
        elif kind == "cylinder":
            radius = rng.uniform(*CYLINDER_RADIUS_RANGE)
            circum = radius
        else:
            length = rng.uniform(*WALL_LENGTH_RANGE)
            thickness = WALL_THICKNESS
            yaw = rng.uniform(0.0, 2.0 * math.pi)
            circum = math.hypot(length / 2.0, thickness / 2.0)
        pos = _disk_point(rng, cx, cy, ZONE_RADIUS - circum)
        obstacles.append(
            Obstacle(
                id=f"OBS_{i + 1}",
                kind=kind,
                center=pos,
                height=height,
                side=side,
                radius=radius,
                length=length,
                thickness=thickness,
                yaw=yaw,
            )
        )

    n_sur = survivor_count if survivor_count is not None else rng.randint(*SURVIVOR_COUNT_RANGE)
    survivors = []
    for i in range(n_sur):
        # survivors are on open ground: re-draw positions landing inside a footprint
        while True:
            pos = _disk_point(rng, cx, cy, ZONE_RADIUS)
            if not any(o.contains_point(*pos) for o in obstacles):
                break
        sig = rng.uniform(*SIGNATURE_RANGE)
        survivors.append(Survivor(id=f"SUR_{i + 1}", position=pos, signature=sig))

    n_wind = wind_zone_count if wind_zone_count is not None else rng.randint(*WIND_COUNT_RANGE)
    wind_zones = []
    for i in range(n_wind):
        wx, wy = _disk_point(rng, cx, cy, ZONE_RADIUS)
        wz = rng.uniform(*WIND_ALTITUDE_RANGE)
        wr = rng.uniform(*WIND_RADIUS_RANGE)
        speed = rng.uniform(*WIND_SPEED_RANGE)
        direction = rng.uniform(0.0, 2.0 * math.pi)
        while True:
            spawn = rng.uniform(60.0, WIND_SPAWN_MAX)
            if spawn > 60.0:
                break
        wind_zones.append(
            WindZone(
                id=f"WIND_{i + 1}",
                center=(wx, wy, wz),
                radius=wr,
                wind_speed=speed,
                wind_dir=direction,
                spawn_time=spawn,
            )
        )

    return Scene(
        seed=seed,
        zone=zone,
        obstacles=tuple(obstacles),
        survivors=tuple(survivors),
        wind_zones=tuple(wind_zones),
    )


# --- JSON round trip ------------------------------------------------------

def scene_to_dict(scene: Scene) -> dict:
    return {
        "schema_version": 1,
        "seed": scene.seed,
        "area_half_extent": scene.area_half_extent,
        "base": list(scene.base),
        "zone": {"center": list(scene.zone.center), "radius": scene.zone.radius},
        "obstacles": [
            {
                "id": o.id,
                "kind": o.kind,
                "center": list(o.center),
                "height": o.height,
                **({"side": o.side} if o.kind == "cube" else {}),
                **({"radius": o.radius} if o.kind == "cylinder" else {}),
                **(
                    {"length": o.length, "thickness": o.thickness, "yaw": o.yaw}
                    if o.kind == "wall"
                    else {}
                ),
            }
            for o in scene.obstacles
        ],
        "survivors": [
            {"id": s.id, "position": list(s.position), "signature": s.signature}
            for s in scene.survivors
        ],
        "wind_zones": [
            {
                "id": w.id,
                "center": list(w.center),
                "radius": w.radius,
                "wind_speed": w.wind_speed,
                "wind_dir": w.wind_dir,
                "spawn_time": w.spawn_time,
            }
            for w in scene.wind_zones
        ],
    }


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def _req(d: dict, key: str, ctx: str = ""):
    if key not in d:
        where = f" in {ctx}" if ctx else ""
        raise SceneFormatError(f"missing field {key}{where}")
    return d[key]


def scene_from_dict(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be an object")
    zone_d = _req(doc, "zone")
    zcx, zcy = _req(zone_d, "center", "zone")
    zone = DisasterZone((float(zcx), float(zcy)), float(_req(zone_d, "radius", "zone")))

    obstacles = []
    for i, od in enumerate(_req(doc, "obstacles")):
        ctx = f"obstacles[{i}]"
        kind = _req(od, "kind", ctx)
        if kind not in OBSTACLE_KINDS:
            raise SceneFormatError(f"unknown obstacle kind {kind!r} in {ctx}")
        ox, oy = _req(od, "center", ctx)
        obstacles.append(
            Obstacle(
                id=str(_req(od, "id", ctx)),
                kind=kind,
                center=(float(ox), float(oy)),
                height=float(_req(od, "height", ctx)),
                side=float(_req(od, "side", ctx)) if kind == "cube" else None,
                radius=float(_req(od, "radius", ctx)) if kind == "cylinder" else None,
                length=float(_req(od, "length", ctx)) if kind == "wall" else None,
                thickness=float(_req(od, "thickness", ctx)) if kind == "wall" else None,
                yaw=float(_req(od, "yaw", ctx)) if kind == "wall" else None,
            )
        )

    survivors = []
    for i, sd in enumerate(_req(doc, "survivors")):
        ctx = f"survivors[{i}]"
        sx, sy = _req(sd, "position", ctx)
        survivors.append(
            Survivor(
                id=str(_req(sd, "id", ctx)),
                position=(float(sx), float(sy)),
                signature=float(_req(sd, "signature", ctx)),
            )
        )

    wind_zones = []
    for i, wd in enumerate(_req(doc, "wind_zones")):
        ctx = f"wind_zones[{i}]"
        wx, wy, wz = _req(wd, "center", ctx)
        wind_zones.append(
            WindZone(
                id=str(_req(wd, "id", ctx)),
                center=(float(wx), float(wy), float(wz)),
                radius=float(_req(wd, "radius", ctx)),
                wind_speed=float(_req(wd, "wind_speed", ctx)),
                wind_dir=float(_req(wd, "wind_dir", ctx)),
                spawn_time=float(_req(wd, "spawn_time", ctx)),
            )
        )

    base = doc.get("base", list(BASE))
    return Scene(
        seed=int(_req(doc, "seed")),
        zone=zone,
        obstacles=tuple(obstacles),
        survivors=tuple(survivors),
        wind_zones=tuple(wind_zones),
        area_half_extent=float(doc.get("area_half_extent", AREA_HALF_EXTENT)),
        base=(float(base[0]), float(base[1]), float(base[2])),
    )


def scene_from_json(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"invalid JSON: {e}") from e
    return scene_from_dict(doc)
