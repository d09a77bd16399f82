"""Mission Instruction Language: the sandboxed executable form of a plan.

A program is an ordered instruction list per UAV.  Labels are produced
only by EMIT instructions; any instruction may carry a ``wait_for`` set and
will not start until every named label has been emitted.  Validation
guarantees unique labels, resolvable waits, an acyclic dependency graph
and well-formed arguments, so anything the executor receives is safe to
run mechanically.

Pattern instructions (LAWNMOWER, ORBIT) expand into explicit waypoint
sequences.  Expansion is deterministic; when a navigation context is
supplied, lawnmower lanes are additionally routed around blocked grid
cells (known obstacles, unmapped cells at low altitude, no-fly geometry)
with an A* detour, falling back to a climb-over when no lateral route
exists.  Routed paths only ever traverse free cells, which keeps them
clear of blocking geometry by construction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from heapq import heappush, heappop

from .errors import MilValidationError
from .regions import Circle, Rect, Region, region_from_dict

UAV_IDS = ("UAV1", "UAV2", "UAV3")

OPS = ("TAKEOFF", "GOTO", "LAWNMOWER", "ORBIT", "LOITER", "RELAY_TRACK", "LAND", "EMIT")

ORBIT_STEP_DEG = 10.0

# extra clearance (m) kept between routed paths and obstacle footprints,
# on top of the UAV body radius
ROUTE_CLEARANCE = 2.0
# half-diagonal of a grid cell; blocking no-fly geometry is inflated by
# this much so that points anywhere inside a free cell stay outside it
CELL_CIRCUMRADIUS = math.hypot(5.0, 5.0)


@dataclass(frozen=True)
class Instruction:
    op: str
    args: dict = field(default_factory=dict)
    label: str | None = None
    wait_for: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d: dict = {"op": self.op}
        if self.label is not None:
            d["label"] = self.label
        if self.args:
            d["args"] = _args_to_dict(self.op, self.args)
        if self.wait_for:
            d["wait_for"] = list(self.wait_for)
        return d


@dataclass(frozen=True)
class MissionProgram:
    uavs: dict[str, tuple[Instruction, ...]]
    no_fly: tuple[Region, ...] = ()

    def instructions(self) -> list[tuple[str, int, Instruction]]:
        return [
            (uav, i, ins)
            for uav, instrs in self.uavs.items()
            for i, ins in enumerate(instrs)
        ]

    def emit_labels(self) -> set[str]:
        return {
            ins.args["label"]
            for _, _, ins in self.instructions()
            if ins.op == "EMIT"
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "uavs": {uav: [i.to_dict() for i in instrs] for uav, instrs in self.uavs.items()},
            "no_fly": [r.to_dict() for r in self.no_fly],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _args_to_dict(op: str, args: dict) -> dict:
    out = dict(args)
    if op == "LAWNMOWER" and isinstance(out.get("region"), (Circle, Rect)):
        out["region"] = out["region"].to_dict()
    return out


def instruction_from_dict(d: dict) -> Instruction:
    if "op" not in d:
        raise MilValidationError("instruction missing op")
    op = d["op"]
    args = dict(d.get("args", {}))
    if op == "LAWNMOWER" and isinstance(args.get("region"), dict):
        args["region"] = region_from_dict(args["region"])
    return Instruction(
        op=op,
        args=args,
        label=d.get("label"),
        wait_for=tuple(d.get("wait_for", ())),
    )


def program_from_dict(doc: dict) -> MissionProgram:
    if "uavs" not in doc:
        raise MilValidationError("program missing uavs")
    uavs = {
        uav: tuple(instruction_from_dict(i) for i in instrs)
        for uav, instrs in doc["uavs"].items()
    }
    no_fly = tuple(region_from_dict(r) for r in doc.get("no_fly", ()))
    return MissionProgram(uavs=uavs, no_fly=no_fly)


def program_from_json(text: str) -> MissionProgram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MilValidationError(f"invalid JSON: {e}") from e
    return program_from_dict(doc)


# --- validation -------------------------------------------------------------

_REQUIRED_ARGS = {
    "TAKEOFF": ("alt",),
    "GOTO": ("x", "y", "z"),
    "LAWNMOWER": ("region", "lane_spacing", "alt"),
    "ORBIT": ("center", "radius", "alt", "revolutions"),
    "LOITER": ("x", "y", "z", "duration"),
    "RELAY_TRACK": ("targets", "alt", "clamp_center", "clamp_radius"),
    "LAND": (),
    "EMIT": ("label",),
}


def validate_program(program: MissionProgram) -> None:
    """Raise MilValidationError unless the program satisfies every MIL rule."""
    for uav in program.uavs:
        if uav not in UAV_IDS:
            raise MilValidationError(f"unknown UAV id {uav!r}")

    labels: set[str] = set()
    for uav, idx, ins in program.instructions():
        where = f"{uav}[{idx}]"
        if ins.op not in OPS:
            raise MilValidationError(f"{where}: unknown op {ins.op!r}")
        if not isinstance(ins.args, dict):
            raise MilValidationError(f"{where}: args must be a mapping")
        for arg in _REQUIRED_ARGS[ins.op]:
            if arg not in ins.args:
                raise MilValidationError(f"{where}: {ins.op} missing arg {arg!r}")
        if ins.op == "LAWNMOWER":
            if not isinstance(ins.args["region"], (Circle, Rect)):
                raise MilValidationError(f"{where}: LAWNMOWER region must be circle or rect")
            if float(ins.args["lane_spacing"]) <= 0:
                raise MilValidationError(f"{where}: lane_spacing must be positive")
        if "alt" in ins.args and float(ins.args["alt"]) <= 0:
            raise MilValidationError(f"{where}: altitude must be positive")
        if ins.op in ("GOTO", "LOITER") and float(ins.args["z"]) < 0:
            raise MilValidationError(f"{where}: z must be non-negative")
        if ins.op == "RELAY_TRACK":
            for t in ins.args["targets"]:
                if t not in UAV_IDS:
                    raise MilValidationError(f"{where}: RELAY_TRACK target {t!r} unknown")
        if ins.op == "EMIT":
            lab = str(ins.args["label"])
            if lab in labels:
                raise MilValidationError(f"{where}: duplicate label {lab!r}")
            labels.add(lab)

    for uav, idx, ins in program.instructions():
        for lab in ins.wait_for:
            if lab not in labels:
                raise MilValidationError(f"{uav}[{idx}]: wait_for unknown label {lab!r}")

    _check_acyclic(program)


def _check_acyclic(program: MissionProgram) -> None:
    """Topological check over sequential-order and label-wait edges."""
    nodes = [(uav, i) for uav, instrs in program.uavs.items() for i in range(len(instrs))]
    emitters = {
        ins.args["label"]: (uav, i)
        for uav, i, ins in program.instructions()
        if ins.op == "EMIT"
    }
    succ: dict[tuple, list[tuple]] = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}

    def add_edge(a: tuple, b: tuple) -> None:
        succ[a].append(b)
        indeg[b] += 1

    for uav, instrs in program.uavs.items():
        for i in range(len(instrs) - 1):
            add_edge((uav, i), (uav, i + 1))
    for uav, i, ins in program.instructions():
        for lab in ins.wait_for:
            if emitters[lab] != (uav, i):
                add_edge(emitters[lab], (uav, i))

    queue = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if seen != len(nodes):
        raise MilValidationError("dependency cycle in wait_for graph")


# --- navigation context -----------------------------------------------------

class NavContext:
    """Grid view used to route low-altitude lanes around hazards.

    ``obstacles`` are the currently knowable obstacles (exact shapes);
    ``mapped`` is a boolean cell array (col, row) or None when the
    unmapped-cell rule does not apply to the flying UAV.  Cells outside
    the grid carry no obstacles and no mapping requirement; only no-fly
    geometry can block them.
    """

    def __init__(
        self,
        origin: tuple[float, float],
        cell_size: float,
        cols: int,
        rows: int,
        obstacles=(),
        mapped=None,
        no_fly: tuple[Region, ...] = (),
        altitude: float = 0.0,
        body_radius: float = 1.0,
        pop_over_alt: float = 60.0,
    ):
        self.origin = origin
        self.cell_size = cell_size
        self.cols = cols
        self.rows = rows
        self.no_fly = tuple(no_fly)
        self.pop_over_alt = pop_over_alt
        self._mapped = mapped
        h_threat = altitude - body_radius - ROUTE_CLEARANCE
        self._obstacles = [o for o in obstacles if o.height >= h_threat]
        self._margin = body_radius + ROUTE_CLEARANCE
        self._blocked_cache: dict[tuple[int, int], bool] = {}
        self._nofly_cache: dict[tuple[int, int], bool] = {}

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.cell_size)),
            int(math.floor((y - self.origin[1]) / self.cell_size)),
        )

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )

    def in_grid(self, col: int, row: int) -> bool:
        return 0 <= col < self.cols and 0 <= row < self.rows

    def is_no_fly(self, col: int, row: int) -> bool:
        key = (col, row)
        hit = self._nofly_cache.get(key)
        if hit is None:
            cx, cy = self.cell_center(col, row)
            hit = self._point_in_no_fly(cx, cy)
            self._nofly_cache[key] = hit
        return hit

    def is_blocked(self, col: int, row: int) -> bool:
        key = (col, row)
        hit = self._blocked_cache.get(key)
        if hit is None:
            hit = self._compute_blocked(col, row)
            self._blocked_cache[key] = hit
        return hit

    def _point_in_no_fly(self, x: float, y: float) -> bool:
        pad = CELL_CIRCUMRADIUS + 0.01
        for r in self.no_fly:
            if isinstance(r, Circle):
                if math.hypot(x - r.cx, y - r.cy) <= r.r + pad:
                    return True
            else:
                if r.xmin - pad <= x <= r.xmax + pad and r.ymin - pad <= y <= r.ymax + pad:
                    return True
        return False

    def _compute_blocked(self, col: int, row: int) -> bool:
        if self.is_no_fly(col, row):
            return True
        if not self.in_grid(col, row):
            return False
        if self._mapped is not None and not self._mapped[col, row]:
            return True
        cx, cy = self.cell_center(col, row)
        half = self.cell_size / 2.0
        for o in self._obstacles:
            if _obstacle_near_cell(o, cx - half, cy - half, cx + half, cy + half, self._margin):
                return True
        return False

    def segment_cells(
        self, ax: float, ay: float, bx: float, by: float
    ) -> list[tuple[int, int]]:
        """Every cell the segment touches (conservative grid traversal)."""
        cells = [self.cell_of(ax, ay)]
        dx, dy = bx - ax, by - ay
        length = math.hypot(dx, dy)
        if length == 0.0:
            return cells
        # step at quarter-cell resolution and union the 3x3 ring on axis
        # crossings; strictly a superset of the exact supercover
        n = int(math.ceil(length / (self.cell_size / 4.0)))
        prev = cells[0]
        for k in range(1, n + 1):
            t = k / n
            c = self.cell_of(ax + dx * t, ay + dy * t)
            if c != prev:
                if abs(c[0] - prev[0]) + abs(c[1] - prev[1]) > 1:
                    # diagonal jump: include both intermediate neighbors
                    cells.append((prev[0], c[1]))
                    cells.append((c[0], prev[1]))
                cells.append(c)
                prev = c
        return cells

    def segment_clear(self, ax: float, ay: float, bx: float, by: float) -> bool:
        return not any(self.is_blocked(*c) for c in self.segment_cells(ax, ay, bx, by))

    def segment_clear_no_fly(self, ax: float, ay: float, bx: float, by: float) -> bool:
        return not any(self.is_no_fly(*c) for c in self.segment_cells(ax, ay, bx, by))


def _obstacle_near_cell(
    obstacle, xmin: float, ymin: float, xmax: float, ymax: float, margin: float
) -> bool:
    """True when the obstacle footprint comes within margin of the cell."""
    if obstacle.kind == "cylinder":
        cx, cy = obstacle.center
        nx = min(max(cx, xmin), xmax)
        ny = min(max(cy, ymin), ymax)
        return math.hypot(cx - nx, cy - ny) <= obstacle.radius + margin
    if obstacle.kind == "cube":
        hx = obstacle.side / 2.0
        cx, cy = obstacle.center
        dx = max(0.0, max(xmin - (cx + hx), (cx - hx) - xmax))
        dy = max(0.0, max(ymin - (cy + hx), (cy - hx) - ymax))
        return math.hypot(dx, dy) <= margin
    # wall: distance between the centerline segment and the cell rectangle
    half_len = obstacle.length / 2.0
    c, s = math.cos(obstacle.yaw), math.sin(obstacle.yaw)
    ax = obstacle.center[0] - half_len * c
    ay = obstacle.center[1] - half_len * s
    bx = obstacle.center[0] + half_len * c
    by = obstacle.center[1] + half_len * s
    d = _segment_rect_distance(ax, ay, bx, by, xmin, ymin, xmax, ymax)
    return d <= obstacle.thickness / 2.0 + margin


def _segment_rect_distance(
    ax: float, ay: float, bx: float, by: float,
    xmin: float, ymin: float, xmax: float, ymax: float,
) -> float:
    from .regions import Rect, segment_intersects_rect_2d, _point_segment_dist_2d

    if segment_intersects_rect_2d(ax, ay, bx, by, Rect(xmin, ymin, xmax, ymax)):
        return 0.0
    cands = []
    for px, py in ((ax, ay), (bx, by)):
        dx = max(0.0, max(xmin - px, px - xmax))
        dy = max(0.0, max(ymin - py, py - ymax))
        cands.append(math.hypot(dx, dy))
    for px, py in ((xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)):
        cands.append(_point_segment_dist_2d(px, py, ax, ay, bx, by))
    return min(cands)


# --- routing ----------------------------------------------------------------

def _astar(
    nav: NavContext,
    start: tuple[int, int],
    goal: tuple[int, int],
    window: tuple[int, int, int, int],
    blocked,
) -> list[tuple[int, int]] | None:
    """4-connected A* within a cell window."""
    cmin, rmin, cmax, rmax = window

    def ok(c: int, r: int) -> bool:
        if (c, r) == start:
            return True  # always allowed to leave the current cell
        return cmin <= c <= cmax and rmin <= r <= rmax and not blocked(c, r)

    if not ok(*goal):
        return None
    open_q: list[tuple[float, tuple[int, int]]] = []
    heappush(open_q, (0.0, start))
    came: dict[tuple[int, int], tuple[int, int]] = {}
    g = {start: 0.0}
    closed: set[tuple[int, int]] = set()
    while open_q:
        _, cur = heappop(open_q)
        if cur == goal:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            return path[::-1]
        if cur in closed:
            continue
        closed.add(cur)
        for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = (cur[0] + dc, cur[1] + dr)
            if nxt in closed or not ok(*nxt):
                continue
            ng = g[cur] + 1.0
            if ng < g.get(nxt, math.inf):
                g[nxt] = ng
                came[nxt] = cur
                h = abs(nxt[0] - goal[0]) + abs(nxt[1] - goal[1])
                heappush(open_q, (ng + h, nxt))
    return None


def _detour(
    nav: NavContext, start: tuple[int, int], goal: tuple[int, int], no_fly_only: bool = False
) -> list[tuple[int, int]] | None:
    blocked = nav.is_no_fly if no_fly_only else nav.is_blocked
    for pad in (8, 16, 28, 48):
        cmin = min(start[0], goal[0]) - pad
        cmax = max(start[0], goal[0]) + pad
        rmin = min(start[1], goal[1]) - pad
        rmax = max(start[1], goal[1]) + pad
        path = _astar(nav, start, goal, (cmin, rmin, cmax, rmax), blocked)
        if path is not None:
            return path
    return None


def connect_points(
    nav: NavContext,
    p: tuple[float, float, float],
    q: tuple[float, float, float],
    alt: float,
) -> list[tuple[float, float, float]]:
    """Intermediate waypoints from p to q at alt, avoiding blocked cells.

    Falls back to a climb-over (still no-fly aware) when no lateral route
    exists; as a true last resort returns the straight hop.
    """
    if nav.segment_clear(p[0], p[1], q[0], q[1]):
        return []
    path = _detour(nav, nav.cell_of(p[0], p[1]), nav.cell_of(q[0], q[1]))
    if path is not None:
        return [(*nav.cell_center(*c), alt) for c in path[1:-1]]
    return _pop_over(nav, p, q)


def _pop_over(
    nav: NavContext, p: tuple[float, float, float], q: tuple[float, float, float]
) -> list[tuple[float, float, float]]:
    """Climb over a blocked span; the high leg still avoids no-fly geometry."""
    top = nav.pop_over_alt
    if nav.segment_clear_no_fly(p[0], p[1], q[0], q[1]):
        return [(p[0], p[1], top), (q[0], q[1], top)]
    path = _detour(nav, nav.cell_of(p[0], p[1]), nav.cell_of(q[0], q[1]), no_fly_only=True)
    if path is not None:
        mid = [(*nav.cell_center(*c), top) for c in path[1:-1]]
        return [(p[0], p[1], top), *mid, (q[0], q[1], top)]
    return [(p[0], p[1], top), (q[0], q[1], top)]


# --- pattern expansion ------------------------------------------------------

def _lane_positions(start: float, end: float, spacing: float) -> list[float]:
    """Lane coordinates from start toward end, stepping by spacing.

    The first lane sits exactly on start; the walk includes end when the
    span is an exact multiple of spacing.
    """
    span = end - start
    n = int(math.floor(abs(span) / spacing + 1e-9))
    step = spacing if span >= 0 else -spacing
    return [start + k * step for k in range(n + 1)]


def expand_lawnmower(
    region: Region,
    lane_spacing: float,
    alt: float,
    nav: NavContext | None = None,
) -> list[tuple[float, float, float]]:
    """Serpentine sweep: parallel lanes along y, joined end to end.

    For rects the sweep starts at the (x0, y0) corner, so corner ordering
    selects both the lane progression direction and the first lane's
    heading.  With a nav context, lanes are routed around blocked cells
    and the lane-to-lane hops are checked the same way.
    """
    lanes: list[tuple[float, float, float]] = []  # (x, y_from, y_to)
    if isinstance(region, Rect):
        for x in _lane_positions(region.x0, region.x1, lane_spacing):
            lanes.append((x, region.y0, region.y1))
    else:
        lo = region.cx - region.r + lane_spacing / 2.0
        for x in _lane_positions(lo, region.cx + region.r, lane_spacing):
            h2 = region.r * region.r - (x - region.cx) ** 2
            if h2 <= 0.0:
                continue
            h = math.sqrt(h2)
            lanes.append((x, region.cy - h, region.cy + h))

    out: list[tuple[float, float, float]] = []
    forward = True
    for x, a, b in lanes:
        y0, y1 = (a, b) if forward else (b, a)
        if nav is None:
            seg = [(x, y0, alt), (x, y1, alt)]
        else:
            seg = _route_lane(nav, x, y0, y1, alt)
        if seg:
            if out and nav is not None:
                out.extend(connect_points(nav, out[-1], seg[0], alt))
            out.extend(seg)
        forward = not forward
    return _dedupe(out)


def _route_lane(
    nav: NavContext, x: float, a: float, b: float, alt: float
) -> list[tuple[float, float, float]]:
    """Route one lane at fixed x from y=a to y=b around blocked cells."""

    def blocked_at(y: float) -> bool:
        return nav.is_blocked(*nav.cell_of(x, y))

    step = nav.cell_size if b >= a else -nav.cell_size
    span = abs(b - a)
    n_steps = max(1, int(math.ceil(span / nav.cell_size)))
    samples = [a + k * step for k in range(n_steps)]
    samples.append(b)

    out: list[tuple[float, float, float]] = []
    i = 0
    # clip a blocked start forward to the first free sample
    while i < len(samples) and blocked_at(samples[i]):
        i += 1
    if i >= len(samples):
        return []
    u = samples[i]
    out.append((x, u, alt))
    i += 1

    while i < len(samples):
        s = samples[i]
        if not blocked_at(s):
            u = s
            i += 1
            continue
        j = i
        while j < len(samples) and blocked_at(samples[j]):
            j += 1
        if j >= len(samples):
            break  # lane ends inside the blocked span: truncate
        rejoin = samples[j]
        if out[-1][1] != u:
            out.append((x, u, alt))
        path = _detour(nav, nav.cell_of(x, u), nav.cell_of(x, rejoin))
        if path is None:
            out.extend(_pop_over(nav, (x, u, alt), (x, rejoin, alt)))
        else:
            out.extend((*nav.cell_center(*c), alt) for c in path[1:-1])
        out.append((x, rejoin, alt))
        u = rejoin
        i = j + 1

    if out[-1][1] != u:
        out.append((x, u, alt))
    return _dedupe(out)


def _dedupe(points: list[tuple[float, float, float]]) -> list[tuple[float, float, float]]:
    out: list[tuple[float, float, float]] = []
    for p in points:
        if not out or math.dist(out[-1], p) > 1e-9:
            out.append(p)
    return out


def expand_orbit(
    center: tuple[float, float], radius: float, alt: float, revolutions: float
) -> list[tuple[float, float, float]]:
    """Discretize an orbit into waypoints at 10-degree steps, starting east."""
    n = int(round(revolutions * 360.0 / ORBIT_STEP_DEG))
    step = math.radians(ORBIT_STEP_DEG)
    return [
        (center[0] + radius * math.cos(k * step),
         center[1] + radius * math.sin(k * step),
         alt)
        for k in range(1, n + 1)
    ]


def expand_instruction(
    ins: Instruction, nav: NavContext | None = None
) -> list[tuple[float, float, float]] | None:
    """Waypoints for pattern ops; None for ops the executor handles natively."""
    if ins.op == "LAWNMOWER":
        return expand_lawnmower(
            ins.args["region"],
            float(ins.args["lane_spacing"]),
            float(ins.args["alt"]),
            nav=nav,
        )
    if ins.op == "ORBIT":
        cx, cy = ins.args["center"]
        return expand_orbit(
            (float(cx), float(cy)),
            float(ins.args["radius"]),
            float(ins.args["alt"]),
            float(ins.args["revolutions"]),
        )
    return None


@dataclass(frozen=True)
class ExecutablePlan:
    """A validated program plus its load-time (context-free) expansion.

    The executor re-expands pattern instructions when they activate so lane
    routing can use everything mapped by then; the preview here reflects
    pure geometry and is what validation, audits and tests inspect.
    """

    program: MissionProgram
    preview: dict[str, tuple[tuple[Instruction, tuple | None], ...]]

    def preview_waypoints(self, uav: str) -> list[tuple[float, float, float]]:
        out = []
        for _, wps in self.preview.get(uav, ()):
            if wps:
                out.extend(wps)
        return out


def load_program(program: MissionProgram, world=None) -> ExecutablePlan:
    """Validate and expand a program; raises MilValidationError when unsound.

    ``world`` is accepted for interface symmetry with the executor but the
    preview expansion is world-independent: it shows the nominal pattern
    geometry (lanes, serpentine order, orbit discretization).
    """
    del world
    validate_program(program)
    preview = {}
    for uav, instrs in program.uavs.items():
        rows = []
        for ins in instrs:
            wps = expand_instruction(ins, nav=None)
            rows.append((ins, tuple(wps) if wps is not None else None))
        preview[uav] = tuple(rows)
    return ExecutablePlan(program=program, preview=preview)
