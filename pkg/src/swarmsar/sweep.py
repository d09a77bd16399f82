"""Deterministic sweep scheduling for the unified mission.

The searcher covers the zone with parallel serpentine lanes.  The mapper
flies one leg per searcher lane, offset two lanes ahead, so its wide
high-altitude footprint maps each lane (plus detour margin) one full lane
before the searcher arrives.  Band-level EMIT labels couple the pair both
ways: the searcher cannot enter a band before it is mapped, and the mapper
cannot run more than two bands ahead of the searcher.  The two working
UAVs therefore advance as a tight formation (about one lane apart, within
a couple of bands in the sweep direction), which a relay hovering at their
midpoint can always bridge within the link limits.

The builder works from the current world state, so the same code produces
the initial program and any mid-mission re-plan: pieces whose cells are
already covered are skipped, no-fly geometry is excluded, and transits are
routed from the UAVs' current positions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .mil import (
    CELL_CIRCUMRADIUS,
    Instruction,
    MissionProgram,
    NavContext,
    connect_points,
)
from .regions import Circle, Rect, Region
from .simcore import GROUNDED, LANDED, ROLES, WorldState


@dataclass(frozen=True)
class SweepParams:
    search_alt: float = 30.0
    search_spacing: float = 57.5
    map_alt: float = 100.0
    transit_alt: float = 60.0
    relay_alt: float = 100.0
    relay_clamp_radius: float = 990.0
    band_height: float = 250.0
    lane_margin: float = 5.0     # lane overshoot past the zone rim
    map_margin: float = 45.0     # mapped ground needed beyond lane ends
    edge_inset: float = 5.0      # rim catch-up lane offset from the square edge

    @classmethod
    def from_kb(cls, parameters: dict) -> "SweepParams":
        known = set(cls.__dataclass_fields__)
        return cls(**{k: float(v) for k, v in parameters.items() if k in known})


ROLE_TO_UAV = {role: uav for uav, role in ROLES.items()}


@dataclass
class Piece:
    y0: float
    y1: float
    band: int
    pending: bool = True
    needs_map: bool = False  # searcher pieces: any underlying cell unmapped


@dataclass
class LaneWork:
    x: float
    pieces: list[Piece] = field(default_factory=list)

    def pending_span(self) -> list[Piece]:
        """Pending pieces in travel order; the executor routes the joins
        across any finished gaps."""
        return [p for p in self.pieces if p.pending]


@dataclass
class SweepPlan:
    lanes: list[LaneWork]       # searcher lanes, travel order
    legs: list[LaneWork]        # mapper legs; legs[0] is the prologue
    y_dir: int


def _lane_xs(cx: float, r: float, params: SweepParams) -> list[float]:
    x0, x1 = cx - r, cx + r
    s = params.search_spacing
    xs = []
    x = x0 + s / 2.0
    while x <= x1 + 1e-9:
        xs.append(x)
        x += s
    if xs and x1 - xs[-1] > params.search_alt - params.edge_inset:
        xs.append(x1 - params.edge_inset)
    return xs


def _cut_bands(lo: float, hi: float, breaks: list[float]) -> list[tuple[float, float, int]]:
    """Split [lo, hi] at interior break points; band ids indexed south→north."""
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    out = []
    for a, b in zip(edges, edges[1:]):
        mid = (a + b) / 2.0
        band = sum(1 for br in breaks if br <= mid)
        out.append((a, b, band))
    return out


def plan_sweep(world: WorldState, params: SweepParams, no_fly: tuple[Region, ...]) -> SweepPlan:
    scene = world.scene
    cx, cy = scene.zone.center
    r = scene.zone.radius
    xs = _lane_xs(cx, r, params)
    if cx < 0:  # base is east of the zone: sweep east-to-west instead
        xs = xs[::-1]
    y_dir = 1 if cy >= 0 else -1
    breaks = [cy - params.band_height, cy, cy + params.band_height]

    grid = world.grid
    nofly_ctx = NavContext(
        origin=grid.origin, cell_size=grid.cell_size, cols=grid.cols, rows=grid.rows,
        no_fly=no_fly,
    )

    def half_at(x: float) -> float:
        h2 = r * r - (x - cx) ** 2
        return math.sqrt(h2) if h2 > 0 else 0.0

    def sample_cells(x: float, ya: float, yb: float):
        lo, hi = min(ya, yb), max(ya, yb)
        y = lo + grid.cell_size / 2.0
        while y < hi:
            yield grid.cell_of(x, y)
            y += grid.cell_size
        yield grid.cell_of(x, hi - 1e-6)

    def search_pending(x: float, ya: float, yb: float) -> bool:
        for col, row in sample_cells(x, ya, yb):
            if not grid.in_grid(col, row) or not grid.in_zone[col, row]:
                continue
            if nofly_ctx.is_no_fly(col, row):
                continue
            if not grid.searched[col, row]:
                return True
        return False

    def map_pending(lane_xs: list[float], ya: float, yb: float) -> bool:
        for x in lane_xs:
            for col, row in sample_cells(x, ya, yb):
                if not grid.in_grid(col, row):
                    continue
                if nofly_ctx.is_no_fly(col, row):
                    continue
                if not grid.mapped[col, row]:
                    return True
        return False

    lanes: list[LaneWork] = []
    for x in xs:
        lo = cy - half_at(x) - params.lane_margin
        hi = cy + half_at(x) + params.lane_margin
        pieces = [
            Piece(
                a, b, band,
                pending=search_pending(x, a, b),
                needs_map=map_pending([x], a, b),
            )
            for a, b, band in _cut_bands(lo, hi, breaks)
        ]
        lanes.append(LaneWork(x=x, pieces=pieces))

    # mapper leg i flies alongside searcher lane i, positioned one lane
    # ahead; its footprint maps that next lane (and re-covers the current
    # one) just before the searcher arrives.  Leg 0 doubles as the prologue
    # covering both lane 0 and lane 1.
    legs: list[LaneWork] = []
    n = len(xs)
    slack = params.map_alt - 5.0  # footprint reach kept as margin
    for i in range(n):
        leg_x = xs[min(i + 1, n - 1)]
        covered = sorted({min(i + 1, n - 1)} | ({0} if i == 0 else set()))
        max_half = max(half_at(xs[j]) for j in covered) + params.lane_margin
        m_half = max(30.0, max(max_half, half_at(leg_x)) + params.map_margin - slack)
        lo, hi = cy - m_half, cy + m_half
        pieces = [
            Piece(a, b, band, pending=map_pending([xs[j] for j in covered] + [leg_x], a, b))
            for a, b, band in _cut_bands(lo, hi, breaks)
        ]
        legs.append(LaneWork(x=leg_x, pieces=pieces))

    return SweepPlan(lanes=lanes, legs=legs, y_dir=y_dir)


# --- program emission -------------------------------------------------------

@dataclass
class SweepBundle:
    """Instructions per role plus the schedule metadata the planner reports."""

    instructions: dict[str, list[Instruction]]
    units: list[dict]
    edges: list[dict]
    labels_by_role: dict[str, list[str]]


def _ordered(pieces: list[Piece], direction: int) -> list[Piece]:
    return pieces if direction > 0 else pieces[::-1]


def _piece_region(x: float, piece: Piece, direction: int) -> Rect:
    ya, yb = (piece.y0, piece.y1) if direction > 0 else (piece.y1, piece.y0)
    return Rect(x, ya, x, yb)


def _lane_dir(index: int, d1: int) -> int:
    return d1 if index % 2 == 0 else -d1


def _travel_pos(band: int, direction: int) -> int:
    """Ordering key of a band along the travel direction."""
    return band * direction


def build_sweep_program(
    world: WorldState,
    params: SweepParams,
    no_fly: tuple[Region, ...] = (),
    roles: tuple[str, ...] = ("Inspector", "Searcher", "Relay"),
) -> SweepBundle:
    plan = plan_sweep(world, params, no_fly)
    d1 = plan.y_dir
    scene = world.scene

    def sl(lane: int, band: int) -> str:
        return f"SL_{lane}_{band}"

    def ml(leg: int, band: int) -> str:
        return f"ML_{leg}_{band}"

    lane_spans = {
        i: lane.pending_span() for i, lane in enumerate(plan.lanes) if lane.pending_span()
    }
    leg_spans = {
        i: leg.pending_span() for i, leg in enumerate(plan.legs) if leg.pending_span()
    }

    present_lanes = sorted(lane_spans)
    present_legs = sorted(leg_spans)
    lane_ordinal = {j: pos for pos, j in enumerate(present_lanes)}
    # leg direction follows its same-ordinal searcher lane (shared by the
    # wait computation below and the mapper emission)
    leg_dir = {}
    for pos, i in enumerate(present_legs):
        mate = present_lanes[pos] if pos < len(present_lanes) else None
        leg_dir[i] = _lane_dir(mate if mate is not None else i, d1)

    def _leg_bands(leg: int) -> list[int]:
        return [p.band for p in _ordered(leg_spans[leg], leg_dir[leg])]

    def _safety_label(leg: int, band: int) -> str | None:
        """Label whose emission guarantees the requested band is mapped:
        the same band, or the leg's nearest end piece (its footprint covers
        the overshoot)."""
        if leg not in leg_spans:
            return None
        bands = _leg_bands(leg)
        if band not in bands:
            band = bands[0] if _travel_pos(band, leg_dir[leg]) < _travel_pos(bands[0], leg_dir[leg]) else bands[-1]
        return ml(leg, band)

    def _formation_label(leg: int, band: int) -> str | None:
        """Label at-or-before the requested band in travel order; None when
        the mapper has already passed it (the searcher may run free: the
        mapper's own pacing waits make it follow)."""
        if leg not in leg_spans:
            return None
        bands = _leg_bands(leg)
        pos_req = _travel_pos(band, leg_dir[leg])
        earlier = [bb for bb in bands if _travel_pos(bb, leg_dir[leg]) <= pos_req]
        if not earlier:
            return None
        return ml(leg, earlier[-1])

    # the first remaining lane of a re-plan flies over ground mapped before
    # the pause; its first piece launches immediately and later pieces only
    # need the mapper's first band (the pair resumes co-located, and this
    # weak gate re-forms the formation without a full re-prime stall)
    first_lane_free = bool(present_lanes) and not any(
        p.needs_map for p in lane_spans[present_lanes[0]]
    )
    first_free_band: int | None = None
    if first_lane_free:
        lane0 = present_lanes[0]
        first_free_band = _ordered(lane_spans[lane0], _lane_dir(lane0, d1))[0].band
    mapper_start_gate: list[str] = []
    if present_legs and leg_spans.get(present_legs[0]):
        leg0 = present_legs[0]
        bands0 = [p.band for p in _ordered(leg_spans[leg0], leg_dir[leg0])]
        mapper_start_gate = [ml(leg0, bands0[0])]

    # waits for a searcher piece: an index-based safety wait (lane j's
    # cells are mapped by leg j-1; lane 0 couples to leg 0) when cells are
    # still unmapped, plus an ordinal-based formation wait that keeps the
    # pair together across re-plans
    def map_wait(lane: int, piece: Piece) -> list[str]:
        out: list[str] = []
        if piece.needs_map:
            safety = _safety_label(max(0, lane - 1), piece.band)
            if safety:
                out.append(safety)
        pos = lane_ordinal.get(lane)
        if pos == 0 and first_lane_free:
            if piece.band != first_free_band:
                for lab in mapper_start_gate:
                    if lab not in out:
                        out.append(lab)
            return out
        if pos is not None and present_legs:
            ord_idx = min(max(0, pos - 1), len(present_legs) - 1)
            formation = _formation_label(present_legs[ord_idx], piece.band)
            if formation and formation not in out:
                out.append(formation)
        return out

    instructions: dict[str, list[Instruction]] = {}
    units: list[dict] = []
    edges: list[dict] = []

    grid = world.grid
    knowable = grid.knowable_obstacle_ids()
    known_obstacles = [o for o in world.scene.obstacles if o.id in knowable]

    def _clip_nav(alt: float) -> NavContext:
        # blocks no-fly geometry and already-known obstacles, but not
        # unmapped cells (they will be mapped before the work starts)
        return NavContext(
            origin=grid.origin, cell_size=grid.cell_size,
            cols=grid.cols, rows=grid.rows,
            obstacles=known_obstacles, no_fly=no_fly, altitude=alt,
        )

    clip_navs = {
        params.search_alt: _clip_nav(params.search_alt),
        params.map_alt: _clip_nav(params.map_alt),
    }

    def clip_start(x: float, y_start: float, y_end: float, alt: float) -> float:
        """First lane point clear of no-fly geometry and known obstacles;
        transit and descent targets must never sit inside either."""
        nav = clip_navs[alt]
        step = grid.cell_size if y_end >= y_start else -grid.cell_size
        y = y_start
        while (y - y_end) * step < 0 and nav.is_blocked(*nav.cell_of(x, y)):
            y += step
        return y

    # --- searcher -----------------------------------------------------------
    searcher_labels: list[str] = []
    if "Searcher" in roles:
        ins_list: list[Instruction] = []
        emitted: list[str] = []
        prev_lane: int | None = None
        for j in sorted(lane_spans):
            span = lane_spans[j]
            dj = _lane_dir(j, d1)
            pieces = _ordered(span, dj)
            start_y = pieces[0].y0 if dj > 0 else pieces[0].y1
            end_y = pieces[-1].y1 if dj > 0 else pieces[-1].y0
            start_y = clip_start(plan.lanes[j].x, start_y, end_y, params.search_alt)
            first_wait = map_wait(j, pieces[0])
            ins_list.extend(
                _transit(
                    world, "UAV2", ins_list, (plan.lanes[j].x, start_y),
                    params.search_alt, params.transit_alt, no_fly,
                    far=prev_lane is None or j - prev_lane > 1,
                    descend_wait=first_wait,
                )
            )
            for piece in pieces:
                ins_list.append(
                    Instruction(
                        "LAWNMOWER",
                        {
                            "region": _piece_region(plan.lanes[j].x, piece, dj),
                            "lane_spacing": params.search_spacing,
                            "alt": params.search_alt,
                        },
                        wait_for=tuple(map_wait(j, piece)),
                    )
                )
                lab = sl(j, piece.band)
                ins_list.append(Instruction("EMIT", {"label": lab}))
                emitted.append(lab)
            prev_lane = j
        if ins_list:
            ins_list.extend(
                _exit_legs(world, ins_list, params.transit_alt, no_fly)
            )
            ins_list.append(Instruction("LAND"))
        instructions["UAV2"] = ins_list
        searcher_labels = emitted

    # --- mapper --------------------------------------------------------------
    mapper_labels: list[str] = []
    if "Inspector" in roles:
        ins_list = []
        emitted = []
        prev_leg: int | None = None
        present_lanes = sorted(lane_spans)
        for pos, i in enumerate(sorted(leg_spans)):
            span = leg_spans[i]
            # pace against the same-ordinal remaining searcher lane, so the
            # formation holds even when a re-plan skipped finished work
            mate = present_lanes[pos] if pos < len(present_lanes) else None
            di = leg_dir[i]
            pieces = _ordered(span, di)
            start_y = pieces[0].y0 if di > 0 else pieces[0].y1
            end_y = pieces[-1].y1 if di > 0 else pieces[-1].y0
            start_y = clip_start(plan.legs[i].x, start_y, end_y, params.map_alt)
            ins_list.extend(
                _transit(
                    world, "UAV1", ins_list, (plan.legs[i].x, start_y),
                    params.map_alt, params.map_alt, no_fly,
                    far=prev_leg is None or i - prev_leg > 1,
                    descend_wait=[],
                )
            )
            # launch gate: the searcher is nearly done with its previous lane
            gate: list[str] = []
            if pos >= 1:
                prev_id = present_lanes[pos - 1] if pos - 1 < len(present_lanes) else None
                if prev_id is not None:
                    prev_pieces = _ordered(lane_spans[prev_id], _lane_dir(prev_id, d1))
                    gate_piece = prev_pieces[-2] if len(prev_pieces) >= 2 else prev_pieces[-1]
                    gate = [sl(prev_id, gate_piece.band)]
            for k, piece in enumerate(pieces):
                # two-band lag keeps the pipeline full: the mapper flies band
                # q while the searcher flies band q+1 right behind it
                if k == 0:
                    wait = gate
                elif k == 1:
                    wait = []
                else:
                    wait = [sl(mate, pieces[k - 2].band)] if mate in lane_spans else []
                ins_list.append(
                    Instruction(
                        "LAWNMOWER",
                        {
                            "region": _piece_region(plan.legs[i].x, piece, di),
                            "lane_spacing": params.search_spacing,
                            "alt": params.map_alt,
                        },
                        wait_for=tuple(wait),
                    )
                )
                lab = ml(i, piece.band)
                ins_list.append(Instruction("EMIT", {"label": lab}))
                emitted.append(lab)
            prev_leg = i
        if ins_list:
            ins_list.extend(
                _exit_legs(world, ins_list, params.map_alt, no_fly)
            )
            ins_list.append(Instruction("LAND"))
        instructions["UAV1"] = ins_list
        mapper_labels = emitted

    # --- relay ---------------------------------------------------------------
    if "Relay" in roles:
        ins_list = []
        relay_state = world.uavs["UAV3"]
        targets = [uav for uav in ("UAV1", "UAV2") if instructions.get(uav)]
        if targets and relay_state.status != LANDED:
            if relay_state.status == GROUNDED:
                ins_list.append(Instruction("TAKEOFF", {"alt": params.relay_alt}))
            # no LAND: the relay holds its final hover (descending at an
            # arbitrary in-zone point could hit an obstacle)
            ins_list.append(
                Instruction(
                    "RELAY_TRACK",
                    {
                        "targets": targets,
                        "alt": params.relay_alt,
                        "clamp_center": [scene.base[0], scene.base[1]],
                        "clamp_radius": params.relay_clamp_radius,
                    },
                )
            )
        instructions["UAV3"] = ins_list

    # prune waits on labels that no instruction emits (skipped work)
    all_labels = {
        ins.args["label"]
        for ins_list in instructions.values()
        for ins in ins_list
        if ins.op == "EMIT"
    }
    for uav, ins_list in instructions.items():
        instructions[uav] = [
            ins
            if not ins.wait_for
            else Instruction(
                ins.op,
                ins.args,
                ins.label,
                tuple(l for l in ins.wait_for if l in all_labels),
            )
            for ins in ins_list
        ]

    # schedule metadata
    if "Relay" in roles and instructions.get("UAV3"):
        units.append({"id": "relay", "role": "Relay", "sector": None})
    if "Inspector" in roles:
        for i in sorted(leg_spans):
            units.append({"id": f"map_leg_{i}", "role": "Inspector", "sector": i})
    if "Searcher" in roles:
        for j in sorted(lane_spans):
            units.append({"id": f"search_lane_{j}", "role": "Searcher", "sector": j})
    if {"Inspector", "Searcher"} <= set(roles):
        for j in sorted(lane_spans):
            leg = max(0, j - 1)
            if leg not in leg_spans:
                continue
            dj = _lane_dir(j, d1)
            label = map_wait(j, _ordered(lane_spans[j], dj)[0])
            if label and label[0] in all_labels:
                edges.append(
                    {"from": f"map_leg_{leg}", "to": f"search_lane_{j}", "label": label[0]}
                )

    return SweepBundle(
        instructions=instructions,
        units=units,
        edges=edges,
        labels_by_role={"Inspector": mapper_labels, "Searcher": searcher_labels, "Relay": []},
    )


def _transit(
    world: WorldState,
    uav_id: str,
    existing: list[Instruction],
    target_xy: tuple[float, float],
    work_alt: float,
    transit_alt: float,
    no_fly: tuple[Region, ...],
    far: bool,
    descend_wait: list[str],
) -> list[Instruction]:
    """Route a UAV to a work start point, climbing for long hops.

    For the first work site this starts from the UAV's physical state
    (takeoff or mid-air); afterwards only far hops get explicit transits,
    nearby lanes are joined by the executor's routed lane joins.
    """
    state = world.uavs[uav_id]
    out: list[Instruction] = []
    first = not existing
    if first:
        if state.status == GROUNDED:
            out.append(Instruction("TAKEOFF", {"alt": transit_alt}))
            start = (state.position[0], state.position[1], transit_alt)
        else:
            start = state.position
            sx, sy = _escape_xy(start[0], start[1], no_fly)
            if (sx, sy) != (start[0], start[1]):
                # leave the no-fly footprint at the current altitude before
                # climbing (the hazard volume may sit directly overhead);
                # the leg is routed against obstacles and unmapped cells
                esc_nav = world.nav_context_for(uav_id, start[2])
                for wp in connect_points(esc_nav, start, (sx, sy, start[2]), start[2]):
                    out.append(Instruction("GOTO", {"x": wp[0], "y": wp[1], "z": start[2]}))
                out.append(Instruction("GOTO", {"x": sx, "y": sy, "z": start[2]}))
                start = (sx, sy, start[2])
            out.append(Instruction("GOTO", {"x": start[0], "y": start[1], "z": transit_alt}))
            start = (start[0], start[1], transit_alt)
    elif far:
        # climb at the previous work site before the long hop; the routed
        # waypoint tolerates lanes that ended early
        prev = _last_position(existing)
        if prev is None:
            return out
        px, py = _escape_xy(prev[0], prev[1], no_fly)
        out.append(_routed_waypoint(px, py, transit_alt))
        start = (px, py, transit_alt)
    else:
        return out

    grid = world.grid
    nav = NavContext(
        origin=grid.origin, cell_size=grid.cell_size, cols=grid.cols, rows=grid.rows,
        no_fly=no_fly, altitude=transit_alt, pop_over_alt=transit_alt,
    )
    goal = (target_xy[0], target_xy[1], transit_alt)
    for wp in connect_points(nav, start, goal, transit_alt):
        out.append(Instruction("GOTO", {"x": wp[0], "y": wp[1], "z": transit_alt}))
    out.append(Instruction("GOTO", {"x": goal[0], "y": goal[1], "z": transit_alt}))
    if work_alt != transit_alt:
        out.append(
            Instruction(
                "GOTO",
                {"x": goal[0], "y": goal[1], "z": work_alt},
                wait_for=tuple(descend_wait),
            )
        )
    return out


def _routed_waypoint(x: float, y: float, alt: float) -> Instruction:
    """A zero-length sweep at (x, y): the executor's activation join routes
    the approach from wherever the UAV really is (lanes may have been
    truncated), honoring cell blocking at this altitude."""
    return Instruction(
        "LAWNMOWER",
        {"region": Rect(x, y, x, y), "lane_spacing": 50.0, "alt": alt},
    )


def _exit_legs(
    world: WorldState,
    ins_list: list[Instruction],
    alt: float,
    no_fly: tuple[Region, ...],
) -> list[Instruction]:
    """Climb out of the work area and park past the zone rim, clear of
    obstacles and excluded geometry, ready for a safe landing."""
    last = _last_position(ins_list) or (world.scene.base[0], world.scene.base[1])
    lx, ly = _escape_xy(last[0], last[1], no_fly)
    out = [_routed_waypoint(lx, ly, alt)]
    exit_xy = _escape_xy(*_safe_exit(world, (lx, ly)), no_fly)
    if exit_xy != (lx, ly):
        grid = world.grid
        nav = NavContext(
            origin=grid.origin, cell_size=grid.cell_size,
            cols=grid.cols, rows=grid.rows, no_fly=no_fly, altitude=alt,
            pop_over_alt=alt,
        )
        for wp in connect_points(nav, (lx, ly, alt), (*exit_xy, alt), alt):
            out.append(Instruction("GOTO", {"x": wp[0], "y": wp[1], "z": alt}))
        out.append(Instruction("GOTO", {"x": exit_xy[0], "y": exit_xy[1], "z": alt}))
    return out


def _last_position(instructions: list[Instruction]) -> tuple[float, float] | None:
    for ins in reversed(instructions):
        if ins.op == "GOTO":
            return (float(ins.args["x"]), float(ins.args["y"]))
        if ins.op == "LAWNMOWER":
            region = ins.args["region"]
            return (region.x1, region.y1)
    return None


def _safe_exit(world: WorldState, from_xy: tuple[float, float]) -> tuple[float, float]:
    """Closest point 20 m outside the zone disk (obstacle-free ground)."""
    cx, cy = world.scene.zone.center
    r = world.scene.zone.radius
    dx, dy = from_xy[0] - cx, from_xy[1] - cy
    d = math.hypot(dx, dy)
    if d >= r + 20.0:
        return from_xy
    if d == 0.0:
        return (cx + r + 20.0, cy)
    f = (r + 20.0) / d
    return (cx + dx * f, cy + dy * f)


def _escape_xy(x: float, y: float, no_fly: tuple[Region, ...]) -> tuple[float, float]:
    """Nearest point safely outside all no-fly geometry (identity if clear).

    The pad clears the cell-level blocking margin, so escape targets always
    land in routable cells."""
    pad = CELL_CIRCUMRADIUS * 2.0 + 1.0
    for _ in range(4):
        moved = False
        for r in no_fly:
            if isinstance(r, Circle):
                d = math.hypot(x - r.cx, y - r.cy)
                if d <= r.r + pad:
                    if d == 0.0:
                        x, y = r.cx + r.r + pad + 1.0, r.cy
                    else:
                        f = (r.r + pad + 1.0) / d
                        x, y = r.cx + (x - r.cx) * f, r.cy + (y - r.cy) * f
                    moved = True
            else:
                if r.xmin - pad <= x <= r.xmax + pad and r.ymin - pad <= y <= r.ymax + pad:
                    exits = [
                        (abs(x - (r.xmin - pad)), (r.xmin - pad - 1.0, y)),
                        (abs(r.xmax + pad - x), (r.xmax + pad + 1.0, y)),
                        (abs(y - (r.ymin - pad)), (x, r.ymin - pad - 1.0)),
                        (abs(r.ymax + pad - y), (x, r.ymax + pad + 1.0)),
                    ]
                    _, (x, y) = min(exits, key=lambda e: e[0])
                    moved = True
        if not moved:
            break
    return x, y


def assemble_program(
    bundle: SweepBundle, no_fly: tuple[Region, ...] = ()
) -> MissionProgram:
    uavs = {
        uav: tuple(ins_list)
        for uav, ins_list in bundle.instructions.items()
        if ins_list
    }
    return MissionProgram(uavs=uavs, no_fly=tuple(no_fly))
