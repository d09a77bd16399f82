"""Pluggable reasoners answering the planner's structured questions.

A reasoner answers one step kind at a time: grounding, intent analysis,
tactic identification, atomicity tests, decomposition, role assignment,
sequencing and code generation.  The rule-based reasoner is deterministic
and runs offline; the remote reasoner (orchestrator module) forwards the
same questions to a chat-completions endpoint.  The planner validates
every answer, so a misbehaving reasoner can degrade planning but never
smuggle an invalid program past it.
"""
from __future__ import annotations

from .intent import ContextPackage, Intention, rule_ground
from .kb import KnowledgeBase, cosine_similarity
from .sweep import ROLE_TO_UAV, SweepBundle, SweepParams, build_sweep_program

STEP_KINDS = (
    "ground",
    "analyze",
    "tactics",
    "is_atomic",
    "decompose",
    "assign_role",
    "sequence",
    "codegen_leaf",
    "assemble",
)

_ATOMIC_TEMPLATES = {
    "Inspector": ("map", "mapping", "survey", "inspect", "assess"),
    "Searcher": ("search", "scan", "find", "locate"),
    "Relay": ("relay", "maintain", "hold", "comms", "communication"),
}
_AVOID_WORDS = ("avoid", "no_fly", "no-fly", "keep")

CANONICAL_SUBTASKS = (
    "map the disaster zone obstacles from high altitude",
    "search the disaster zone for survivors with thermal imaging",
    "hold a communication relay between the working drones and the base station",
)


class RuleReasoner:
    """Deterministic offline reasoner: template matching plus the sweep
    scheduler for code generation."""

    name = "rule"

    def ask(self, step_kind: str, context: dict):
        handler = getattr(self, f"_{step_kind}", None)
        if handler is None:
            raise ValueError(f"unknown step kind {step_kind!r}")
        return handler(context)

    # -- steps ---------------------------------------------------------------

    def _ground(self, context: dict) -> Intention:
        ctx: ContextPackage = context["context"]
        return rule_ground(ctx)

    def _analyze(self, context: dict) -> str:
        intent: Intention = context["intent"]
        snapshot = context.get("world", {})
        zone = snapshot.get("zone", {})
        parts = [f"task type {intent.task_type}", f"priority {intent.priority}"]
        if intent.target_object_id:
            parts.append(f"target {intent.target_object_id}")
        if zone:
            parts.append(
                f"zone center ({zone['center'][0]:.0f}, {zone['center'][1]:.0f}), "
                f"radius {zone['radius']:.0f} m"
            )
        if intent.constraints:
            parts.append("constraints " + ", ".join(k for k, _ in intent.constraints))
        return "; ".join(parts)

    def _tactics(self, context: dict) -> list[str]:
        kb: KnowledgeBase = context["kb"]
        intent: Intention = context["intent"]
        keys = [intent.task_type.lower()] + [k for k, _ in intent.constraints]
        out = []
        for key in keys:
            for kb_key, text in kb.tactics.items():
                if kb_key in key or key in kb_key:
                    out.append(text)
        return out or [kb.tactics.get("composite", "")]

    def _is_atomic(self, context: dict) -> bool:
        return self._match_role(context["task"]) is not None

    def _decompose(self, context: dict) -> list[str]:
        return list(CANONICAL_SUBTASKS)

    def _assign_role(self, context: dict) -> str:
        role = self._match_role(context["task"])
        if role is None:
            raise ValueError(f"no role template matches task {context['task']!r}")
        return role

    @staticmethod
    def _match_role(task: str) -> str | None:
        words = task.lower().split()
        if not words:
            return None
        head = words[0]
        if any(head.startswith(w) for w in _AVOID_WORDS):
            return "Searcher"  # avoidance constrains the low-altitude sweep
        for role, verbs in _ATOMIC_TEMPLATES.items():
            if any(head.startswith(v) for v in verbs):
                return role
        # single-role phrasing anywhere in a short task line
        hits = {
            role
            for role, verbs in _ATOMIC_TEMPLATES.items()
            if any(v in words for v in verbs)
        }
        return hits.pop() if len(hits) == 1 else None

    def _sequence(self, context: dict) -> dict:
        bundle = self._bundle(context)
        return {"units": bundle.units, "edges": bundle.edges}

    def _codegen_leaf(self, context: dict) -> dict:
        role = context["role"]
        bundle = self._bundle(context)
        uav = ROLE_TO_UAV[role]
        return {
            "uavs": {uav: [i.to_dict() for i in bundle.instructions.get(uav, [])]}
        }

    def _assemble(self, context: dict) -> dict:
        fragments: list[dict] = context["fragments"]
        uavs: dict[str, list] = {}
        for frag in fragments:
            for uav, instrs in frag.get("uavs", {}).items():
                uavs.setdefault(uav, []).extend(instrs)
        return {"uavs": uavs, "no_fly": [r.to_dict() for r in context.get("no_fly", ())]}

    def _bundle(self, context: dict) -> SweepBundle:
        # one schedule per planning run: sequencing and code generation must
        # agree, so the bundle is memoized on the shared context object
        bundle = context.get("_sweep_bundle")
        if bundle is None:
            params: SweepParams = context.get("params") or SweepParams()
            bundle = build_sweep_program(
                context["world_state"],
                params,
                tuple(context.get("no_fly", ())),
                roles=tuple(context.get("roles", ("Inspector", "Searcher", "Relay"))),
            )
            context["_sweep_bundle"] = bundle
        return bundle


class ReplayReasoner:
    """Replays recorded reasoner answers; used to re-run audited trials."""

    name = "replay"

    def __init__(self, exchanges: list[dict]):
        self._answers: dict[int, object] = {}
        self._order = []
        for i, ex in enumerate(exchanges):
            self._order.append((ex["step_kind"], ex["answer"]))
        self._cursor = 0

    def ask(self, step_kind: str, context: dict):
        if self._cursor >= len(self._order):
            raise ValueError("replay log exhausted")
        recorded_kind, answer = self._order[self._cursor]
        if recorded_kind != step_kind:
            raise ValueError(
                f"replay mismatch: log has {recorded_kind!r}, asked {step_kind!r}"
            )
        self._cursor += 1
        return answer


def similarity(a: str, b: str) -> float:
    return cosine_similarity(a, b)
