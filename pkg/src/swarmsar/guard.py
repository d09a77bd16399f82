"""Per-tick enforcement of the hard mission constraints.

Every predicate that holds in a given world state yields a Violation; the
trial runner treats the first violation as terminal.  Link rules measure
Euclidean 3-D distance and are suspended for UAVs that are not airborne.
The low-altitude rule applies to the searcher only, is strict (altitude
must exceed 50 m over unmapped cells) and is evaluated against the grid
cell containing its horizontal position; positions outside the grid carry
no cell and are exempt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .simcore import ACTIVE, BODY_RADIUS, UNMAPPED_MIN_ALT, WorldState

T_MAX = 1800.0
LINK_UAV_MAX = 400.0
LINK_BASE_MAX = 1000.0

COLLISION = "Collision"
UNMAPPED_LOW_ALTITUDE = "UnmappedLowAltitude"
LINK_UAV = "LinkUav"
LINK_BASE = "LinkBase"
WIND_ENTRY = "WindEntry"
TIMEOUT = "Timeout"


@dataclass(frozen=True)
class Violation:
    time: float
    uav: str | None
    kind: str
    detail: str

    def to_dict(self) -> dict:
        return {"time": self.time, "uav": self.uav, "kind": self.kind, "detail": self.detail}


def check(world: WorldState, t_max: float = T_MAX) -> list[Violation]:
    """All constraint violations present in this world state."""
    out: list[Violation] = []
    scene = world.scene
    t = world.time

    for uav_id, s in world.uavs.items():
        if s.status != ACTIVE:
            continue
        x, y, z = s.position
        for o in scene.obstacles:
            if o.distance_to_solid(x, y, z) <= BODY_RADIUS:
                out.append(
                    Violation(t, uav_id, COLLISION, f"body sphere intersects {o.id}")
                )
                break

    s2 = world.uavs["UAV2"]
    if s2.status == ACTIVE and s2.position[2] <= UNMAPPED_MIN_ALT:
        col, row = world.grid.cell_of(s2.position[0], s2.position[1])
        if world.grid.in_grid(col, row) and not world.grid.mapped[col, row]:
            out.append(
                Violation(
                    t,
                    "UAV2",
                    UNMAPPED_LOW_ALTITUDE,
                    f"altitude {s2.position[2]:.1f} m over unmapped cell ({col},{row})",
                )
            )

    relay = world.uavs["UAV3"]
    if relay.status == ACTIVE:
        for other_id in ("UAV1", "UAV2"):
            other = world.uavs[other_id]
            if other.status != ACTIVE:
                continue
            d = math.dist(other.position, relay.position)
            if d > LINK_UAV_MAX:
                out.append(
                    Violation(
                        t, other_id, LINK_UAV, f"{other_id}-UAV3 distance {d:.1f} m > 400 m"
                    )
                )
        d_base = math.dist(relay.position, scene.base)
        if d_base > LINK_BASE_MAX:
            out.append(
                Violation(t, "UAV3", LINK_BASE, f"UAV3-base distance {d_base:.1f} m > 1000 m")
            )

    active_zones = [w for w in scene.wind_zones if t >= w.spawn_time]
    for uav_id, s in world.uavs.items():
        if s.status != ACTIVE:
            continue
        for w in active_zones:
            if math.dist(s.position, w.center) <= w.radius:
                out.append(Violation(t, uav_id, WIND_ENTRY, f"inside wind zone {w.id}"))
                break

    if t > t_max:
        out.append(Violation(t, None, TIMEOUT, f"time {t:.1f} s exceeds {t_max:.0f} s"))

    return out
