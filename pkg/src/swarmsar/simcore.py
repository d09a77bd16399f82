"""Tick-based kinematic simulation of the three-UAV swarm.

The executor advances a validated mission program: UAVs fly straight lines
between waypoints at constant speed, pattern instructions expand into
waypoint queues when they activate (so lane routing sees everything mapped
by then), EMIT publishes labels and ``wait_for`` gates hold instructions
until their labels exist.

Sensor model: both cameras look straight down with a 90-degree full-angle
cone, so the ground footprint radius equals the altitude.  The inspector
reveals mapped cells; the searcher marks cells searched and detects
survivors only inside its legal altitude band.  ``perceive`` is the
perception oracle: it reports ground truth restricted to what the swarm
could actually know (mapped obstacles, detected survivors, active wind
zones) and never leaks undiscovered state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .mil import ExecutablePlan, Instruction, NavContext, connect_points, expand_instruction
from .regions import Circle, Rect, Region
from .scene import Scene

DT = 0.5
MAX_SPEED = 10.0
BODY_RADIUS = 1.0
SNAP_TOLERANCE = 0.5
CELL_SIZE = 10.0
SEARCH_ALT_MIN = 10.0
SEARCH_ALT_MAX = 30.0
MAP_ALT_MIN = 50.0
MAP_ALT_MAX = 100.0
UNMAPPED_MIN_ALT = 50.0   # UAV2 must stay above this over unmapped cells
POP_OVER_ALT = 60.0
BASE_PREMAP_RADIUS = 50.0

ROLES = {"UAV1": "Inspector", "UAV2": "Searcher", "UAV3": "Relay"}
SENSORS = {"Inspector": "SceneCamera", "Searcher": "Infrared", "Relay": "CommsPackage"}

GROUNDED = "Grounded"
ACTIVE = "Active"
LANDED = "Landed"
FAILED = "Failed"


@dataclass(frozen=True)
class UavSpec:
    id: str
    role: str
    sensor: str
    max_speed: float = MAX_SPEED
    body_radius: float = BODY_RADIUS


UAV_SPECS = {
    uav: UavSpec(id=uav, role=role, sensor=SENSORS[role]) for uav, role in ROLES.items()
}


@dataclass(frozen=True)
class UavState:
    id: str
    position: tuple[float, float, float]
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    status: str = GROUNDED
    instruction_index: int = 0
    started: bool = False
    waypoints: tuple[tuple[float, float, float], ...] = ()
    loiter_until: float | None = None


class CoverageGrid:
    """10 m cells tiling the zone's bounding square; arrays indexed [col, row].

    ``obstacle_occupied`` is ground truth (cells overlapping any obstacle
    footprint); consumers must intersect it with ``mapped`` to honor the
    knowability rule.  Instances are treated as immutable; marking returns
    a new grid sharing unchanged arrays.
    """

    def __init__(self, scene: Scene, mapped=None, searched=None):
        x0, y0, x1, y1 = scene.zone.bounding_square()
        self.origin = (x0, y0)
        self.cell_size = CELL_SIZE
        self.cols = int(round((x1 - x0) / CELL_SIZE))
        self.rows = int(round((y1 - y0) / CELL_SIZE))
        self.mapped = (
            mapped if mapped is not None else np.zeros((self.cols, self.rows), dtype=bool)
        )
        self.searched = (
            searched if searched is not None else np.zeros((self.cols, self.rows), dtype=bool)
        )
        self._scene = scene
        cached = _static_cache.get(scene)
        if cached is None:
            cached = self._build_static(scene)
            if len(_static_cache) > 128:
                _static_cache.clear()
            _static_cache[scene] = cached
        (self.centers_x, self.centers_y, self.in_zone,
         self.obstacle_occupied, self.obstacle_cells) = cached

    def _build_static(self, scene: Scene):
        xs = self.origin[0] + (np.arange(self.cols) + 0.5) * CELL_SIZE
        ys = self.origin[1] + (np.arange(self.rows) + 0.5) * CELL_SIZE
        cx, cy = scene.zone.center
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        in_zone = (gx - cx) ** 2 + (gy - cy) ** 2 <= scene.zone.radius**2
        occupied = np.zeros((self.cols, self.rows), dtype=bool)
        obstacle_cells: dict[str, list[tuple[int, int]]] = {}
        half = CELL_SIZE / 2.0
        for o in scene.obstacles:
            cells = []
            r = o.footprint_circumradius() + half * math.sqrt(2.0)
            c0 = max(0, int((o.center[0] - r - self.origin[0]) // CELL_SIZE))
            c1 = min(self.cols - 1, int((o.center[0] + r - self.origin[0]) // CELL_SIZE))
            r0 = max(0, int((o.center[1] - r - self.origin[1]) // CELL_SIZE))
            r1 = min(self.rows - 1, int((o.center[1] + r - self.origin[1]) // CELL_SIZE))
            for col in range(c0, c1 + 1):
                for row in range(r0, r1 + 1):
                    ccx, ccy = xs[col], ys[row]
                    if o.intersects_cell(ccx - half, ccy - half, ccx + half, ccy + half):
                        occupied[col, row] = True
                        cells.append((col, row))
            obstacle_cells[o.id] = cells
        return xs, ys, in_zone, occupied, obstacle_cells

    def copy(self) -> "CoverageGrid":
        return CoverageGrid(self._scene, self.mapped.copy(), self.searched.copy())

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.cell_size)),
            int(math.floor((y - self.origin[1]) / self.cell_size)),
        )

    def in_grid(self, col: int, row: int) -> bool:
        return 0 <= col < self.cols and 0 <= row < self.rows

    def mark_disk(self, array: np.ndarray, x: float, y: float, radius: float) -> None:
        """Set cells whose centers lie within radius of (x, y); in-place."""
        c0 = max(0, int((x - radius - self.origin[0]) // self.cell_size))
        c1 = min(self.cols - 1, int((x + radius - self.origin[0]) // self.cell_size))
        if c1 < c0:
            return
        r0 = max(0, int((y - radius - self.origin[1]) // self.cell_size))
        r1 = min(self.rows - 1, int((y + radius - self.origin[1]) // self.cell_size))
        if r1 < r0:
            return
        dx = self.centers_x[c0 : c1 + 1, None] - x
        dy = self.centers_y[None, r0 : r1 + 1] - y
        mask = dx * dx + dy * dy <= radius * radius
        array[c0 : c1 + 1, r0 : r1 + 1] |= mask

    def knowable_obstacle_ids(self) -> set[str]:
        out = set()
        for oid, cells in self.obstacle_cells.items():
            if any(self.mapped[c, r] for c, r in cells):
                out.add(oid)
        return out

    def mapped_zone_fraction(self) -> float:
        total = int(self.in_zone.sum())
        return float((self.mapped & self.in_zone).sum()) / total if total else 0.0

    def searched_zone_fraction(self) -> float:
        total = int(self.in_zone.sum())
        return float((self.searched & self.in_zone).sum()) / total if total else 0.0


_static_cache: dict = {}


@dataclass(frozen=True)
class Detection:
    survivor_id: str
    time: float
    position: tuple[float, float]


@dataclass(frozen=True)
class SemanticObject:
    object_id: str
    cls: str  # Obstacle | Survivor | WindZone | Building
    coordinates: tuple[float, float, float]
    attributes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "class": self.cls,
            "coordinates": list(self.coordinates),
            "attributes": dict(self.attributes),
        }


@dataclass(frozen=True)
class WorldState:
    time: float
    scene: Scene
    uavs: dict[str, UavState]
    grid: CoverageGrid
    detections: tuple[Detection, ...] = ()
    completed_labels: frozenset = frozenset()

    @property
    def active_wind_zones(self) -> frozenset:
        return frozenset(
            w.id for w in self.scene.wind_zones if self.time >= w.spawn_time
        )

    def detected_ids(self) -> set[str]:
        return {d.survivor_id for d in self.detections}

    def nav_context_for(
        self, uav_id: str, altitude: float, no_fly: tuple[Region, ...] = ()
    ) -> NavContext:
        knowable = self.grid.knowable_obstacle_ids()
        obstacles = [o for o in self.scene.obstacles if o.id in knowable]
        mapped = (
            self.grid.mapped
            if (uav_id == "UAV2" and altitude <= UNMAPPED_MIN_ALT)
            else None
        )
        return NavContext(
            origin=self.grid.origin,
            cell_size=self.grid.cell_size,
            cols=self.grid.cols,
            rows=self.grid.rows,
            obstacles=obstacles,
            mapped=mapped,
            no_fly=no_fly,
            altitude=altitude,
            body_radius=BODY_RADIUS,
            pop_over_alt=POP_OVER_ALT,
        )


def initial_world(scene: Scene) -> WorldState:
    grid = CoverageGrid(scene)
    bx, by, _ = scene.base
    grid.mark_disk(grid.mapped, bx, by, BASE_PREMAP_RADIUS)  # base area is surveyed
    uavs = {
        uav: UavState(id=uav, position=scene.base, status=GROUNDED)
        for uav in UAV_SPECS
    }
    return WorldState(time=0.0, scene=scene, uavs=uavs, grid=grid)


def reset_labels(world: WorldState) -> WorldState:
    """Clear emitted labels; used when a new program replaces the active one."""
    uavs = {
        uav: replace(s, instruction_index=0, started=False, waypoints=(), loiter_until=None)
        for uav, s in world.uavs.items()
    }
    return replace(world, uavs=uavs, completed_labels=frozenset())


# --- executor ---------------------------------------------------------------

def step(world: WorldState, plan: ExecutablePlan, dt: float = DT) -> WorldState:
    """Advance the world one tick under the given plan; pure function."""
    program = plan.program
    new_uavs: dict[str, UavState] = {}
    labels = set(world.completed_labels)
    grid = world.grid
    grid_copied = False
    detections = list(world.detections)
    detected = {d.survivor_id for d in detections}
    time_after = world.time + dt

    def ensure_grid() -> CoverageGrid:
        nonlocal grid, grid_copied
        if not grid_copied:
            grid = grid.copy()
            grid_copied = True
        return grid

    for uav_id in ("UAV1", "UAV2", "UAV3"):
        state = world.uavs[uav_id]
        instrs = program.uavs.get(uav_id, ())
        if state.status in (LANDED, FAILED):
            new_uavs[uav_id] = replace(state, velocity=(0.0, 0.0, 0.0))
            continue

        state = replace(state, velocity=(0.0, 0.0, 0.0))
        budget = MAX_SPEED * dt
        pos0 = state.position

        # activate / complete zero-duration instructions, then move
        guard_count = 0
        while True:
            guard_count += 1
            if guard_count > len(instrs) + 8:
                break
            if state.instruction_index >= len(instrs):
                break
            ins = instrs[state.instruction_index]
            if not state.started:
                if not set(ins.wait_for) <= labels:
                    break  # blocked: hover in place
                started = _activate(state, ins, world, program, uav_id)
                if started is None:
                    # zero-duration op: EMIT or empty expansion
                    if ins.op == "EMIT":
                        labels.add(str(ins.args["label"]))
                    state = replace(
                        state,
                        instruction_index=state.instruction_index + 1,
                        started=False,
                        waypoints=(),
                        loiter_until=None,
                    )
                    continue
                state = started
            state, budget, done = _advance(state, ins, world, budget, time_after, program.no_fly)
            if done:
                state = replace(
                    state,
                    instruction_index=state.instruction_index + 1,
                    started=False,
                    waypoints=(),
                    loiter_until=None,
                )
                continue
            break

        vel = tuple((p - q) / dt for p, q in zip(state.position, pos0))
        state = replace(state, velocity=vel)
        new_uavs[uav_id] = state

        # sensing at the post-move position
        if state.status == ACTIVE:
            x, y, z = state.position
            role = ROLES[uav_id]
            if role == "Inspector" and z > 0:
                g = ensure_grid()
                g.mark_disk(g.mapped, x, y, z)
            elif role == "Searcher" and SEARCH_ALT_MIN <= z <= SEARCH_ALT_MAX:
                g = ensure_grid()
                g.mark_disk(g.searched, x, y, z)
                for s in world.scene.survivors:
                    if s.id in detected:
                        continue
                    if math.hypot(s.position[0] - x, s.position[1] - y) <= z:
                        detections.append(
                            Detection(survivor_id=s.id, time=time_after, position=s.position)
                        )
                        detected.add(s.id)

    return WorldState(
        time=time_after,
        scene=world.scene,
        uavs=new_uavs,
        grid=grid,
        detections=tuple(detections),
        completed_labels=frozenset(labels),
    )


def _activate(
    state: UavState, ins: Instruction, world: WorldState, program, uav_id: str
) -> UavState | None:
    """Set up instruction state; None means the op completed instantly."""
    x, y, z = state.position
    if ins.op == "EMIT":
        return None
    if ins.op == "TAKEOFF":
        wp = (x, y, float(ins.args["alt"]))
        return replace(state, status=ACTIVE, started=True, waypoints=(wp,))
    if ins.op == "GOTO":
        wp = (float(ins.args["x"]), float(ins.args["y"]), float(ins.args["z"]))
        return replace(state, status=ACTIVE, started=True, waypoints=(wp,))
    if ins.op == "LOITER":
        wp = (float(ins.args["x"]), float(ins.args["y"]), float(ins.args["z"]))
        return replace(state, status=ACTIVE, started=True, waypoints=(wp,), loiter_until=None)
    if ins.op == "LAND":
        wp = (x, y, 0.0)
        return replace(state, started=True, waypoints=(wp,))
    if ins.op == "RELAY_TRACK":
        return replace(state, status=ACTIVE, started=True, waypoints=())
    if ins.op in ("LAWNMOWER", "ORBIT"):
        alt = float(ins.args["alt"])
        nav = (
            world.nav_context_for(uav_id, alt, no_fly=program.no_fly)
            if ins.op == "LAWNMOWER"
            else None
        )
        wps = list(expand_instruction(ins, nav=nav) or ())
        if not wps:
            return None
        if nav is not None and state.status == ACTIVE:
            # route the join from the current position to the sweep start so
            # inter-instruction hops obey the same cell blocking as lanes
            here = (x, y, alt)
            join = connect_points(nav, here, wps[0], alt)
            wps = [here, *join, *wps]
        return replace(state, status=ACTIVE, started=True, waypoints=tuple(wps))
    raise AssertionError(f"unreachable op {ins.op}")


def _advance(
    state: UavState, ins: Instruction, world: WorldState, budget: float, now: float,
    no_fly: tuple[Region, ...] = (),
) -> tuple[UavState, float, bool]:
    """Move within the speed budget; returns (state, leftover budget, done)."""
    if ins.op == "RELAY_TRACK":
        return _advance_relay(state, ins, world, budget, no_fly)

    pos = state.position
    wps = list(state.waypoints)
    while wps and budget > 1e-12:
        d = math.dist(pos, wps[0])
        if d <= budget:
            pos = wps.pop(0)
            budget -= d
        else:
            f = budget / d
            pos = tuple(p + (w - p) * f for p, w in zip(pos, wps[0]))
            budget = 0.0
    state = replace(state, position=pos, waypoints=tuple(wps))

    if wps:
        return state, budget, False

    if ins.op == "LOITER":
        if state.loiter_until is None:
            state = replace(state, loiter_until=now + float(ins.args["duration"]))
            return state, budget, False
        return state, budget, now >= state.loiter_until - 1e-9
    if ins.op == "LAND":
        return replace(state, status=LANDED), budget, True
    return state, budget, True


def _advance_relay(
    state: UavState, ins: Instruction, world: WorldState, budget: float,
    no_fly: tuple[Region, ...] = (),
) -> tuple[UavState, float, bool]:
    targets = [world.uavs[t] for t in ins.args["targets"]]
    if all(t.status in (LANDED, FAILED) for t in targets):
        return state, budget, True
    airborne = [t for t in targets if t.status == ACTIVE] or targets
    mx = sum(t.position[0] for t in airborne) / len(airborne)
    my = sum(t.position[1] for t in airborne) / len(airborne)
    ccx, ccy = ins.args["clamp_center"]
    clamp_r = float(ins.args["clamp_radius"])
    if _in_no_fly(mx, my, no_fly):
        # park on the keep-out boundary point that best balances the links
        mx, my = _balanced_boundary_point(mx, my, airborne, no_fly, ccx, ccy, clamp_r)
    for _ in range(3):  # no-fly push and clamp can fight; settle jointly
        dx, dy = mx - ccx, my - ccy
        dist = math.hypot(dx, dy)
        if dist > clamp_r:
            mx = ccx + dx / dist * clamp_r
            my = ccy + dy / dist * clamp_r
        px, py = _push_out_of_no_fly(mx, my, no_fly)
        if (px, py) == (mx, my):
            break
        mx, my = px, py
    dx, dy = mx - ccx, my - ccy
    dist = math.hypot(dx, dy)
    if dist > clamp_r:
        mx = ccx + dx / dist * clamp_r
        my = ccy + dy / dist * clamp_r
    goal = (mx, my, float(ins.args["alt"]))
    pos = state.position
    d = math.dist(pos, goal)
    if d <= budget:
        nxt = goal
    elif d > 0:
        f = budget / d
        nxt = tuple(p + (g - p) * f for p, g in zip(pos, goal))
    else:
        nxt = pos
    # skirt no-fly geometry tangentially instead of cutting through it
    if _in_no_fly(nxt[0], nxt[1], no_fly):
        tx, ty = _tangent_step(pos[0], pos[1], goal[0], goal[1], no_fly, budget)
        if math.hypot(tx - ccx, ty - ccy) > clamp_r:
            # cornered between hazard and clamp ring: hold position
            return replace(state, position=pos), 0.0, False
        step_len = math.hypot(tx - pos[0], ty - pos[1])
        if step_len > budget and step_len > 0:
            f = budget / step_len
            tx, ty = pos[0] + (tx - pos[0]) * f, pos[1] + (ty - pos[1]) * f
        nxt = (tx, ty, nxt[2])
    return replace(state, position=nxt), 0.0, False


def _tangent_step(
    px: float, py: float, gx: float, gy: float,
    no_fly: tuple[Region, ...], budget: float,
) -> tuple[float, float]:
    """Next point moving around the blocking region toward the goal."""
    blocking = None
    for r in no_fly:
        if isinstance(r, Circle):
            if math.hypot(px - r.cx, py - r.cy) <= r.r + _NO_FLY_PAD + budget:
                blocking = r
                break
        else:
            if (
                r.xmin - _NO_FLY_PAD - budget <= px <= r.xmax + _NO_FLY_PAD + budget
                and r.ymin - _NO_FLY_PAD - budget <= py <= r.ymax + _NO_FLY_PAD + budget
            ):
                blocking = r
                break
    if blocking is None:
        return _push_out_of_no_fly(px, py, no_fly)
    if isinstance(blocking, Circle):
        rx, ry = px - blocking.cx, py - blocking.cy
        norm = math.hypot(rx, ry) or 1.0
        rx, ry = rx / norm, ry / norm
        t1, t2 = (-ry, rx), (ry, -rx)
        gxv, gyv = gx - px, gy - py
        tx, ty = t1 if t1[0] * gxv + t1[1] * gyv >= t2[0] * gxv + t2[1] * gyv else t2
        cand = (px + tx * budget, py + ty * budget)
        # keep the candidate on or outside the keep-out ring
        dx, dy = cand[0] - blocking.cx, cand[1] - blocking.cy
        dd = math.hypot(dx, dy)
        ring = blocking.r + _NO_FLY_PAD + 1.0
        if dd < ring and dd > 0:
            cand = (blocking.cx + dx / dd * ring, blocking.cy + dy / dd * ring)
        return _push_out_of_no_fly(cand[0], cand[1], no_fly)
    # rectangle: slide along the nearest free axis direction toward the goal
    gxv, gyv = gx - px, gy - py
    if abs(gxv) >= abs(gyv):
        cand = (px, py + (_NO_FLY_PAD if gyv >= 0 else -_NO_FLY_PAD) + (budget if gyv >= 0 else -budget))
    else:
        cand = (px + (budget if gxv >= 0 else -budget), py)
    return _push_out_of_no_fly(cand[0], cand[1], no_fly)


def _balanced_boundary_point(
    mx: float, my: float, targets, no_fly: tuple[Region, ...],
    ccx: float, ccy: float, clamp_r: float,
) -> tuple[float, float]:
    """Candidate keep-out boundary points; pick the one minimizing the
    larger horizontal link to the tracked UAVs."""
    candidates: list[tuple[float, float]] = [_push_out_of_no_fly(mx, my, no_fly)]
    for r in no_fly:
        if not isinstance(r, Circle):
            continue
        ring = r.r + _NO_FLY_PAD + 1.0
        for k in range(16):
            a = k * math.pi / 8.0
            candidates.append((r.cx + ring * math.cos(a), r.cy + ring * math.sin(a)))

    def score(pt: tuple[float, float]) -> float:
        if _in_no_fly(pt[0], pt[1], no_fly):
            return math.inf
        if math.hypot(pt[0] - ccx, pt[1] - ccy) > clamp_r:
            return math.inf
        return max(
            math.hypot(t.position[0] - pt[0], t.position[1] - pt[1]) for t in targets
        )

    best = min(candidates, key=score)
    if score(best) == math.inf:
        return candidates[0]
    return best


_NO_FLY_PAD = 10.0


def _in_no_fly(x: float, y: float, no_fly: tuple[Region, ...]) -> bool:
    for r in no_fly:
        if isinstance(r, Circle):
            if math.hypot(x - r.cx, y - r.cy) <= r.r + _NO_FLY_PAD:
                return True
        elif (
            r.xmin - _NO_FLY_PAD <= x <= r.xmax + _NO_FLY_PAD
            and r.ymin - _NO_FLY_PAD <= y <= r.ymax + _NO_FLY_PAD
        ):
            return True
    return False


def _push_out_of_no_fly(x: float, y: float, no_fly: tuple[Region, ...]) -> tuple[float, float]:
    for _ in range(4):
        moved = False
        for r in no_fly:
            if isinstance(r, Circle):
                d = math.hypot(x - r.cx, y - r.cy)
                if d <= r.r + _NO_FLY_PAD:
                    if d == 0.0:
                        x, y = r.cx + r.r + _NO_FLY_PAD + 1.0, r.cy
                    else:
                        f = (r.r + _NO_FLY_PAD + 1.0) / d
                        x, y = r.cx + (x - r.cx) * f, r.cy + (y - r.cy) * f
                    moved = True
            else:
                if (
                    r.xmin - _NO_FLY_PAD <= x <= r.xmax + _NO_FLY_PAD
                    and r.ymin - _NO_FLY_PAD <= y <= r.ymax + _NO_FLY_PAD
                ):
                    exits = [
                        (abs(x - (r.xmin - _NO_FLY_PAD)), (r.xmin - _NO_FLY_PAD - 1.0, y)),
                        (abs(r.xmax + _NO_FLY_PAD - x), (r.xmax + _NO_FLY_PAD + 1.0, y)),
                        (abs(y - (r.ymin - _NO_FLY_PAD)), (x, r.ymin - _NO_FLY_PAD - 1.0)),
                        (abs(r.ymax + _NO_FLY_PAD - y), (x, r.ymax + _NO_FLY_PAD + 1.0)),
                    ]
                    _, (x, y) = min(exits, key=lambda e: e[0])
                    moved = True
        if not moved:
            return x, y
    return x, y


def program_complete(world: WorldState, plan: ExecutablePlan) -> bool:
    """True when every UAV has landed, failed or exhausted its instructions."""
    for uav_id, state in world.uavs.items():
        if state.status in (LANDED, FAILED):
            continue
        instrs = plan.program.uavs.get(uav_id, ())
        if state.instruction_index < len(instrs):
            return False
    return True


# --- perception oracle ------------------------------------------------------

def perceive(world: WorldState, region: Region) -> list[SemanticObject]:
    """Ground truth restricted to the knowable set, clipped to region."""
    if _degenerate(region):
        return []
    out: list[SemanticObject] = []
    knowable = world.grid.knowable_obstacle_ids()
    for o in world.scene.obstacles:
        if o.id in knowable and region.contains(*o.center):
            attrs = {"kind": o.kind, "height": o.height}
            for k in ("side", "radius", "length", "thickness", "yaw"):
                v = getattr(o, k)
                if v is not None:
                    attrs[k] = v
            out.append(
                SemanticObject(o.id, "Obstacle", (o.center[0], o.center[1], 0.0), attrs)
            )
    detected = world.detected_ids()
    for s in world.scene.survivors:
        if s.id in detected and region.contains(*s.position):
            out.append(
                SemanticObject(
                    s.id,
                    "Survivor",
                    (s.position[0], s.position[1], 0.0),
                    {"thermal_signature": s.signature},
                )
            )
    active = world.active_wind_zones
    for w in world.scene.wind_zones:
        if w.id in active and region.contains(w.center[0], w.center[1]):
            out.append(
                SemanticObject(
                    w.id,
                    "WindZone",
                    w.center,
                    {
                        "radius": w.radius,
                        "wind_speed": w.wind_speed,
                        "spawn_time": w.spawn_time,
                    },
                )
            )
    return out


def _degenerate(region: Region) -> bool:
    if isinstance(region, Circle):
        return region.r <= 0.0
    return region.xmin == region.xmax or region.ymin == region.ymax


def world_digest(world: WorldState) -> dict:
    """Compact JSON view of the world: UAV states plus knowable objects."""
    scene = world.scene
    whole = Rect(
        -scene.area_half_extent,
        -scene.area_half_extent,
        scene.area_half_extent,
        scene.area_half_extent,
    )
    return {
        "time": world.time,
        "uavs": {
            uav: {
                "position": list(s.position),
                "velocity": list(s.velocity),
                "status": s.status,
                "instruction_index": s.instruction_index,
            }
            for uav, s in world.uavs.items()
        },
        "mapped_pct": round(world.grid.mapped_zone_fraction() * 100.0, 2),
        "searched_pct": round(world.grid.searched_zone_fraction() * 100.0, 2),
        "detections": [
            {"survivor_id": d.survivor_id, "time": d.time, "position": list(d.position)}
            for d in world.detections
        ],
        "active_wind_zones": sorted(world.active_wind_zones),
        "objects": [o.to_dict() for o in perceive(world, whole)],
        "zone": {"center": list(scene.zone.center), "radius": scene.zone.radius},
    }
