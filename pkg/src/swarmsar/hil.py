"""Closed-loop verification: propose, confirm, execute, re-plan.

A session grounds operator input, plans, and presents the package for an
explicit decision.  Rejection feedback is parsed into high-priority
constraints and triggers a re-planning cycle; only approved programs ever
reach the executor (asserted, not assumed).  During execution a hazard
spawning mid-flight pauses the mission and re-proposes a plan for the
remaining work when the operator policy supports reactive decisions.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from . import guard as guard_mod
from .errors import PlanningError, ReasonerUnavailable, SwarmSarError
from .intent import Annotation, ContextPackage, Intention, ground_intent
from .kb import Exemplar, KnowledgeBase
from .metrics import MAPPED_SUCCESS_FRACTION, MissionResult
from .mil import load_program
from .planner import SolutionPackage, generate_solution_package
from .regions import Circle, Rect, Region, parse_geometry_phrases
from .scene import Scene
from .simcore import (
    WorldState,
    initial_world,
    program_complete,
    reset_labels,
    step,
    world_digest,
)
from .sweep import SweepParams

# searched-coverage bar (percent) at which the search objective counts as
# met; completing the program also ends the mission regardless
SEARCH_OBJECTIVE_PCT = 93.0

IDLE = "Idle"
GROUNDING = "Grounding"
PLANNING = "Planning"
PROPOSED = "Proposed"
EXECUTING = "Executing"
REPLANNING = "Replanning"
DONE = "Done"
FAILED = "Failed"

DEFAULT_MAX_REPLANS = 3
DEFAULT_MISSION_UTTERANCE = (
    "Run the full mission: map the disaster zone, search for survivors "
    "with thermal imaging, and maintain a communication relay."
)


@dataclass(frozen=True)
class Constraint:
    kind: str  # NoFlyCircle | NoFlyRect | Custom
    geometry: Region | None
    text: str
    priority: str = "high"  # feedback always outranks other preferences

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "geometry": self.geometry.to_dict() if self.geometry else None,
            "text": self.text,
            "priority": self.priority,
        }


def parse_feedback(text: str, zone) -> list[Constraint]:
    """Total parse of operator feedback into constraints.

    Recognizes "avoid circle(x,y[,z],r)", "avoid rect(x1,y1,x2,y2)" and
    "avoid the <compass> quadrant" (of the zone's bounding square); anything
    else becomes a Custom constraint passed to the reasoner verbatim.
    """
    regions = parse_geometry_phrases(text, zone.center[0], zone.center[1], zone.radius)
    out: list[Constraint] = []
    for r in regions:
        kind = "NoFlyCircle" if isinstance(r, Circle) else "NoFlyRect"
        out.append(Constraint(kind=kind, geometry=r, text=text))
    if not out:
        out.append(Constraint(kind="Custom", geometry=None, text=text))
    return out


@dataclass(frozen=True)
class Decision:
    approve: bool
    feedback: str = ""


class AutoApprove:
    """Approves everything; no reactive re-planning."""

    name = "auto_approve"
    reactive = False

    def decide(self, package: SolutionPackage, digest: dict) -> Decision:
        return Decision(approve=True)


class WindAwareRejector:
    """Rejects a plan whose flight path crosses an active wind sphere
    inflated by a 20 m margin; feedback names the inflated sphere."""

    name = "wind_aware"
    reactive = True
    margin = 20.0

    def decide(self, package: SolutionPackage, digest: dict) -> Decision:
        zones = [
            o
            for o in digest.get("objects", [])
            if o.get("class") == "WindZone"
        ]
        if not zones:
            return Decision(approve=True)
        path_by_uav = _nominal_paths(package, digest)
        offending = []
        for z in zones:
            cx, cy, cz = z["coordinates"]
            true_r = float(z["attributes"]["radius"])
            if any(
                _polyline_hits_sphere(path, (cx, cy, cz), true_r + self.margin, true_r)
                for path in path_by_uav.values()
            ):
                offending.append((cx, cy, cz, true_r))
        if not offending:
            return Decision(approve=True)
        feedback = "; ".join(
            f"avoid circle({cx},{cy},{cz},{r + self.margin})" for cx, cy, cz, r in offending
        )
        return Decision(approve=False, feedback=feedback)


class InteractiveBridge:
    """Defers decisions to an external operator (the console, via the
    gateway); `submit` is called from another thread."""

    name = "interactive"
    reactive = True

    def __init__(self, timeout: float = 600.0):
        import threading

        self._decisions: list[Decision] = []
        self._cv = threading.Condition()
        self.timeout = timeout

    def submit(self, approve: bool, feedback: str = "") -> None:
        with self._cv:
            self._decisions.append(Decision(approve=approve, feedback=feedback))
            self._cv.notify_all()

    def decide(self, package: SolutionPackage, digest: dict) -> Decision:
        with self._cv:
            while not self._decisions:
                if not self._cv.wait(timeout=self.timeout):
                    raise SwarmSarError("operator decision timed out")
            return self._decisions.pop(0)


def _nominal_paths(
    package: SolutionPackage, digest: dict
) -> dict[str, list[tuple[float, float, float]]]:
    """Expected *remaining* flight path per UAV: instructions already
    completed are skipped and the path starts from the UAV's current
    position.  Patterns expand under the program's own no-fly geometry
    (mirroring how the executor will route them); the dynamically steered
    relay is excluded."""
    from .mil import NavContext, connect_points, expand_instruction
    from .simcore import CELL_SIZE, POP_OVER_ALT

    program = package.program
    zone = digest.get("zone", {"center": (0.0, 0.0), "radius": 500.0})
    zcx, zcy = zone["center"]
    zr = float(zone["radius"])
    n = int(round(2 * zr / CELL_SIZE))

    out: dict[str, list[tuple[float, float, float]]] = {}
    for uav, instrs in program.uavs.items():
        pts: list[tuple[float, float, float]] = []
        pos: tuple[float, float, float] | None = None
        uav_digest = digest.get("uavs", {}).get(uav, {})
        # instruction indices refer to the package only while it is the one
        # executing (a re-proposal after a hazard spawn); fresh packages
        # start from instruction zero
        start_index = 0
        if digest.get("package_active"):
            start_index = int(uav_digest.get("instruction_index", 0))
        if uav_digest.get("status") in ("Active",) and uav_digest.get("position"):
            pos = tuple(uav_digest["position"])
            pts.append(pos)
        for ins in instrs[start_index:]:
            if ins.op == "TAKEOFF":
                base = pos or (0.0, 0.0, 0.0)
                pos = (base[0], base[1], float(ins.args["alt"]))
                pts.append(pos)
            elif ins.op in ("GOTO", "LOITER"):
                pos = (float(ins.args["x"]), float(ins.args["y"]), float(ins.args["z"]))
                pts.append(pos)
            elif ins.op == "LAND":
                if pos is not None:
                    pos = (pos[0], pos[1], 0.0)
                    pts.append(pos)
            elif ins.op in ("LAWNMOWER", "ORBIT"):
                nav = None
                if ins.op == "LAWNMOWER":
                    nav = NavContext(
                        origin=(zcx - zr, zcy - zr), cell_size=CELL_SIZE,
                        cols=n, rows=n, no_fly=program.no_fly,
                        altitude=float(ins.args["alt"]), pop_over_alt=POP_OVER_ALT,
                    )
                wps = expand_instruction(ins, nav=nav) or []
                if wps:
                    if nav is not None and pos is not None:
                        # model the executor's routed join into the sweep
                        alt = float(ins.args["alt"])
                        pts.extend(connect_points(nav, pos, wps[0], alt))
                    pts.extend(wps)
                    pos = wps[-1]
        out[uav] = pts
    return out


def _polyline_hits_sphere(
    pts: list[tuple[float, float, float]],
    center: tuple[float, float, float],
    r: float,
    true_r: float | None = None,
) -> bool:
    """True when the path enters the sphere of radius r.

    A leading portion inside the margin shell (a UAV caught between the
    true hazard radius ``true_r`` and the inflated ``r`` while escaping) is
    tolerated as long as it never reaches the true sphere itself."""
    hard = r if true_r is None else true_r
    start = 0
    while start < len(pts) and math.dist(pts[start], center) <= r:
        if math.dist(pts[start], center) <= hard:
            return True
        start += 1
    for a, b in zip(pts[start:], pts[start + 1:]):
        if _seg_point_dist3(a, b, center) <= r:
            return True
    return False


def _seg_point_dist3(a, b, p) -> float:
    ab = [b[i] - a[i] for i in range(3)]
    ap = [p[i] - a[i] for i in range(3)]
    denom = sum(v * v for v in ab)
    t = 0.0 if denom == 0 else max(0.0, min(1.0, sum(x * y for x, y in zip(ab, ap)) / denom))
    q = [a[i] + ab[i] * t for i in range(3)]
    return math.dist(p, q)


@dataclass
class SessionLog:
    events: list[dict] = field(default_factory=list)

    def add(self, t: float, kind: str, **payload) -> dict:
        event = {"t": t, "kind": kind, **payload}
        self.events.append(event)
        return event


class Session:
    """One mission: state machine from intent to mission result."""

    def __init__(
        self,
        scene: Scene,
        kb: KnowledgeBase,
        exemplars: tuple[Exemplar, ...],
        reasoner,
        policy,
        params: SweepParams | None = None,
        max_replans: int = DEFAULT_MAX_REPLANS,
        t_max: float = guard_mod.T_MAX,
        method: str = "Full",
        on_event=None,
        direct: bool = False,
        tick_hook=None,
    ):
        self.scene = scene
        self.kb = kb
        self.exemplars = exemplars
        self.reasoner = reasoner
        self.policy = policy
        self.params = params or SweepParams.from_kb(kb.parameters)
        self.max_replans = max_replans
        self.t_max = t_max
        self.method = method
        self.world: WorldState = initial_world(scene)
        self.phase = IDLE
        self.constraints: list[Constraint] = []
        self.decision_log: list[dict] = []
        self.log = SessionLog()
        self.package: SolutionPackage | None = None
        self.intent: Intention | None = None
        self._approved_ids: set[int] = set()
        self._replans_used = 0
        self._on_event = on_event
        self.direct = direct
        self._tick_hook = tick_hook

    # -- infrastructure --------------------------------------------------------

    def _emit(self, kind: str, **payload) -> None:
        event = self.log.add(self.world.time, kind, **payload)
        if self._on_event is not None:
            self._on_event(event)

    def _set_phase(self, phase: str, cause: str) -> None:
        self.phase = phase
        self._emit("PhaseChange", phase=phase, cause=cause)

    def _no_fly(self) -> tuple[Region, ...]:
        return tuple(c.geometry for c in self.constraints if c.geometry is not None)

    # -- phases ----------------------------------------------------------------

    def ground(self, utterance: str | None = None, annotations=()) -> Intention:
        self._set_phase(GROUNDING, "intent received")
        ctx = ContextPackage(
            latest_utterance=utterance or DEFAULT_MISSION_UTTERANCE,
            image_annotations=tuple(
                a if isinstance(a, Annotation) else Annotation(**a) for a in annotations
            ),
            world_snapshot=world_digest(self.world),
        )
        self.intent = ground_intent(ctx, self.reasoner)
        if self.intent.task_type == "Avoid" and self.intent.spatial_context is not None:
            kind = (
                "NoFlyCircle"
                if isinstance(self.intent.spatial_context, Circle)
                else "NoFlyRect"
            )
            self.constraints.append(
                Constraint(kind=kind, geometry=self.intent.spatial_context,
                           text=ctx.latest_utterance)
            )
        self._emit("IntentGrounded", task_type=self.intent.task_type)
        return self.intent

    def plan(self) -> SolutionPackage:
        assert self.intent is not None, "ground an intent first"
        self._set_phase(PLANNING, "planning")
        intent = self.intent
        if intent.task_type == "Avoid":
            # avoidance folds into constraints; plan the remaining mission
            intent = Intention(task_type="Composite", priority=intent.priority)
        custom = [c.text for c in self.constraints if c.kind == "Custom"]
        if custom:
            # free-text feedback rides along verbatim for the reasoner
            extra = tuple(("operator_note", text) for text in custom)
            intent = dataclasses.replace(
                intent, constraints=tuple(intent.constraints) + extra
            )
        if self.direct:
            self.package = _direct_package(
                intent, self.world, self.reasoner, self._no_fly()
            )
        else:
            self.package = generate_solution_package(
                intent,
                self.world,
                self.kb,
                self.exemplars,
                self.reasoner,
                no_fly=self._no_fly(),
                params=self.params,
            )
        self._emit(
            "PlanProposed",
            summary=self.package.summary,
            instructions={u: len(i) for u, i in self.package.program.uavs.items()},
        )
        self._set_phase(PROPOSED, "plan ready")
        return self.package

    def decide(self) -> Decision:
        assert self.package is not None
        decision = self.policy.decide(self.package, world_digest(self.world))
        self.record_decision(decision)
        return decision

    def record_decision(self, decision: Decision) -> None:
        if not decision.approve and not decision.feedback.strip():
            raise SwarmSarError("a rejection requires non-empty feedback")
        self.decision_log.append(
            {
                "time": self.world.time,
                "decision": "approve" if decision.approve else "reject",
                "feedback": decision.feedback,
            }
        )
        self._emit(
            "Decision",
            decision="approve" if decision.approve else "reject",
            feedback=decision.feedback,
        )
        if decision.approve:
            self._approved_ids.add(id(self.package))
        else:
            self.constraints.extend(parse_feedback(decision.feedback, self.scene.zone))

    def propose_until_approved(self) -> bool:
        """Plan/propose/decide loop; False when the replan budget runs out."""
        while True:
            self.plan()
            decision = self.decide()
            if decision.approve:
                return True
            self._replans_used += 1
            if self._replans_used > self.max_replans:
                return False
            self._set_phase(REPLANNING, "operator rejection")

    def run(self, utterance: str | None = None, annotations=()) -> MissionResult:
        try:
            self.ground(utterance, annotations)
            if not self.propose_until_approved():
                return self._finish(FAILED, "ReplanBudget")
            return self.execute()
        except (PlanningError, ReasonerUnavailable) as e:
            # an unreachable reasoner is infrastructure failure (excluded
            # from MSR); a plan the validator rejects is a mission failure
            self._emit("Error", error=str(e))
            infra = isinstance(e, ReasonerUnavailable)
            return self._finish(FAILED, type(e).__name__, errored=infra, error=str(e))

    def execute(self) -> MissionResult:
        assert self.package is not None
        # safety gate: never execute a package without a recorded approval
        if id(self.package) not in self._approved_ids:
            raise SwarmSarError("refusing to execute a package without approval")
        self._set_phase(EXECUTING, "operator approval")
        plan = load_program(self.package.program)
        self.world = reset_labels(self.world)

        while True:
            prev_active = self.world.active_wind_zones
            prev_detected = self.world.detected_ids()
            prev_labels = self.world.completed_labels
            self.world = step(self.world, plan)
            if self._tick_hook is not None:
                self._tick_hook(self.world)

            for d in self.world.detections:
                if d.survivor_id not in prev_detected:
                    self._emit(
                        "Detection", survivor_id=d.survivor_id, position=list(d.position)
                    )
            new_labels = self.world.completed_labels - prev_labels
            if new_labels:
                self._emit("LabelEmitted", labels=sorted(new_labels))

            violations = guard_mod.check(self.world, self.t_max)
            if violations:
                v = violations[0]
                self._emit("Violation", violation=v.to_dict())
                return self._finish(FAILED, v.kind)

            spawned = self.world.active_wind_zones - prev_active
            if spawned:
                self._emit("HazardSpawn", wind_zones=sorted(spawned))
                if getattr(self.policy, "reactive", False):
                    outcome, changed = self._reactive_replan()
                    if outcome is not None:
                        return outcome
                    if changed:
                        plan = load_program(self.package.program)
                        self.world = reset_labels(self.world)
                    self._set_phase(EXECUTING, "resumed after replan")
                    continue

            if program_complete(self.world, plan) or self._objectives_met():
                return self._finish(DONE, None)

    def _objectives_met(self) -> bool:
        w = self.world
        if not w.scene.survivors or len(w.detected_ids()) < len(w.scene.survivors):
            return False
        if w.grid.mapped_zone_fraction() < MAPPED_SUCCESS_FRACTION:
            return False
        return w.grid.searched_zone_fraction() * 100.0 >= SEARCH_OBJECTIVE_PCT

    def _reactive_replan(self) -> tuple[MissionResult | None, bool]:
        """Pause and re-propose; (None, changed) means ready to resume."""
        self._set_phase(REPLANNING, "hazard spawned")
        changed = False
        while True:
            digest = world_digest(self.world)
            if not changed:
                # re-proposing the currently-executing package: the world's
                # instruction indices are valid for it
                digest["package_active"] = True
            decision = self.policy.decide(self.package, digest)
            self.record_decision(decision)
            if decision.approve:
                return None, changed
            self._replans_used += 1
            if self._replans_used > self.max_replans:
                return self._finish(FAILED, "ReplanBudget"), changed
            self.plan()
            changed = True

    def _finish(
        self, phase: str, cause: str | None, errored: bool = False, error: str | None = None
    ) -> MissionResult:
        self._set_phase(phase, cause or "objectives evaluated")
        w = self.world
        mapped = w.grid.mapped_zone_fraction() * 100.0
        coverage = w.grid.searched_zone_fraction() * 100.0
        found = (
            100.0 * len(w.detected_ids()) / len(w.scene.survivors)
            if w.scene.survivors
            else 0.0
        )
        success = (
            phase == DONE
            and cause is None
            and mapped >= MAPPED_SUCCESS_FRACTION * 100.0
            and found >= 100.0
            and w.time <= self.t_max
        )
        if phase == DONE and not success and cause is None:
            cause = "ObjectivesUnmet"
        result = MissionResult(
            success=success,
            failure_cause=None if success else cause,
            coverage_pct=coverage,
            found_pct=found,
            mapped_pct=mapped,
            mission_time=w.time,
            seed=w.scene.seed,
            method=self.method,
            policy=getattr(self.policy, "name", "unknown"),
            errored=errored,
            error=error,
        )
        self._emit("MissionEnd", result=result.to_dict())
        return result


def _direct_package(intent, world, reasoner, no_fly) -> SolutionPackage:
    """One-shot program generation (no decomposition pipeline): the whole
    plan comes from a single reasoner call, then passes the same validation
    gate as pipeline output."""
    from .mil import program_from_dict, validate_program
    from .planner import CotStep, PlanSeq, TaskTree
    from .sweep import ROLE_TO_UAV

    answer = reasoner.ask(
        "full_program",
        {"intent": intent, "world": world_digest(world), "no_fly": tuple(no_fly)},
    )
    try:
        program = program_from_dict(answer)
        validate_program(program)
    except Exception as e:
        raise PlanningError(f"direct program invalid: {e}") from e
    uav_roles = {uav: role for role, uav in ROLE_TO_UAV.items()}
    tree = TaskTree(task=intent.task_text())
    for uav in sorted(program.uavs):
        tree.subtasks.append(TaskTree(task=f"direct fragment {uav}", role=uav_roles[uav]))
    if not tree.subtasks:
        raise PlanningError("direct program contains no UAV instructions")
    sizes = {uav: len(i) for uav, i in program.uavs.items()}
    return SolutionPackage(
        summary=f"Directly generated program; instruction counts {sizes}.",
        cot_trace=(CotStep("Generate", f"single-shot program {sizes}"),),
        task_tree=tree,
        plan_seq=PlanSeq(units=(), edges=()),
        program=program,
        leaf_fragments={f"direct fragment {uav}": [uav] for uav in program.uavs},
    )


def run_session(
    scene: Scene,
    kb: KnowledgeBase,
    exemplars: tuple[Exemplar, ...],
    reasoner,
    policy,
    utterance: str | None = None,
    annotations=(),
    max_replans: int = DEFAULT_MAX_REPLANS,
    params: SweepParams | None = None,
    method: str = "Full",
    on_event=None,
) -> MissionResult:
    session = Session(
        scene, kb, exemplars, reasoner, policy,
        params=params, max_replans=max_replans, method=method, on_event=on_event,
    )
    return session.run(utterance, annotations)
