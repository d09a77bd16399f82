"""Plan generation: knowledge retrieval, exemplar selection, recursive
task decomposition with role assignment, sequencing and compilation to a
mission program.

The pipeline runs over an abstract reasoner and records every exchange
into an auditable reasoning trace.  All structural guarantees live here,
not in the reasoner: roles must exist in the knowledge base, decomposition
depth is capped, schedules must be acyclic, code fragments may only use
instructions the leaf's role is allowed, and the assembled program must
pass full instruction-language validation before it can leave this module.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PlanningError
from .intent import Intention
from .kb import (
    HARD_CONSTRAINT_KEYS,
    Exemplar,
    KnowledgeBase,
    find_most_similar_exemplar,
    tokenize,
)
from .mil import MissionProgram, program_from_dict, validate_program
from .regions import Region
from .simcore import WorldState, world_digest
from .sweep import ROLE_TO_UAV, SweepParams

MAX_DECOMPOSE_DEPTH = 8

STEP_ANALYZE = "Analyze"
STEP_RETRIEVE = "Retrieve"
STEP_ASSIGN = "Assign"
STEP_SEQUENCE = "Sequence"
STEP_GENERATE = "Generate"


@dataclass
class TaskTree:
    task: str
    role: str | None = None
    subtasks: list["TaskTree"] = field(default_factory=list)

    def leaves(self) -> list["TaskTree"]:
        if not self.subtasks:
            return [self]
        out = []
        for st in self.subtasks:
            out.extend(st.leaves())
        return out

    def validate(self, kb: KnowledgeBase) -> None:
        for node in self._walk():
            is_leaf = not node.subtasks
            if is_leaf and node.role is None:
                raise PlanningError(f"leaf {node.task!r} has no role")
            if not is_leaf and node.role is not None:
                raise PlanningError(f"interior node {node.task!r} carries a role")
            if is_leaf and node.role not in kb.uav_roles:
                raise PlanningError(f"role {node.role!r} not in knowledge base")

    def _walk(self):
        yield self
        for st in self.subtasks:
            yield from st._walk()

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "role": self.role,
            "subtasks": [st.to_dict() for st in self.subtasks],
        }


@dataclass(frozen=True)
class DomainContext:
    tactics: dict[str, str]
    constraints: dict[str, str]


@dataclass(frozen=True)
class PlanSeq:
    units: tuple[dict, ...]
    edges: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {"units": list(self.units), "edges": list(self.edges)}


@dataclass(frozen=True)
class CotStep:
    kind: str
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class SolutionPackage:
    summary: str
    cot_trace: tuple[CotStep, ...]
    task_tree: TaskTree
    plan_seq: PlanSeq
    program: MissionProgram
    leaf_fragments: dict[str, list[str]]  # leaf task -> UAVs contributed

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "summary": self.summary,
            "cot_trace": [s.to_dict() for s in self.cot_trace],
            "task_tree": self.task_tree.to_dict(),
            "plan_seq": self.plan_seq.to_dict(),
            "program": self.program.to_dict(),
            "leaf_fragments": self.leaf_fragments,
        }


def retrieve_knowledge(intent: Intention, kb: KnowledgeBase) -> DomainContext:
    """Tactics and constraints whose keys match the intent's keywords; the
    hard mission constraints are always included."""
    keywords = set(tokenize(intent.task_type))
    if intent.target_object_id:
        keywords.update(tokenize(intent.target_object_id))
    for key, value in intent.constraints:
        keywords.update(tokenize(key))
        keywords.update(tokenize(value))

    tactics = {k: v for k, v in kb.tactics.items() if k in keywords}
    constraints = {k: v for k, v in kb.constraints.items() if k in keywords}
    for k in HARD_CONSTRAINT_KEYS:
        if k in kb.constraints:
            constraints[k] = kb.constraints[k]
    return DomainContext(tactics=tactics, constraints=constraints)


def recursive_decompose(
    node: TaskTree,
    analysis: str,
    tactics: list[str],
    kb: KnowledgeBase,
    exemplars: tuple[Exemplar, ...],
    reasoner,
    depth: int = 0,
    trace: list | None = None,
) -> TaskTree:
    """Expand a task node until every leaf carries a role from the KB."""
    if depth >= MAX_DECOMPOSE_DEPTH:
        raise PlanningError(
            f"decomposition exceeded depth {MAX_DECOMPOSE_DEPTH}", trace=trace or []
        )
    ref = find_most_similar_exemplar(node.task, exemplars)
    ask_ctx = {
        "task": node.task,
        "analysis": analysis,
        "tactics": tactics,
        "capabilities": kb.capabilities,
        "uav_roles": kb.uav_roles,
        "exemplar_cot": ref.cot,
    }
    if bool(reasoner.ask("is_atomic", ask_ctx)):
        role = str(reasoner.ask("assign_role", ask_ctx))
        if role not in kb.uav_roles:
            raise PlanningError(f"assigned role {role!r} not in knowledge base", trace=trace or [])
        node.role = role
        return node
    subtasks = reasoner.ask("decompose", ask_ctx)
    if not isinstance(subtasks, (list, tuple)) or not subtasks:
        raise PlanningError("decompose step returned no subtasks", trace=trace or [])
    for st in subtasks:
        child = TaskTree(task=str(st))
        recursive_decompose(
            child, analysis, tactics, kb, exemplars, reasoner, depth + 1, trace
        )
        node.subtasks.append(child)
    return node


def sequence_tasks(tree: TaskTree, kb: KnowledgeBase, reasoner, context: dict) -> PlanSeq:
    """Dependency schedule over the tree's leaves; cyclic answers are rejected."""
    answer = reasoner.ask(
        "sequence",
        {**context, "tree": tree.to_dict(), "constraints": kb.constraints},
    )
    if not isinstance(answer, dict) or "units" not in answer or "edges" not in answer:
        raise PlanningError("sequence step returned no unit/edge structure")
    units = tuple(answer["units"])
    edges = tuple(answer["edges"])
    ids = {u["id"] for u in units}
    adj: dict[str, list[str]] = {i: [] for i in ids}
    for e in edges:
        if e["from"] not in ids or e["to"] not in ids:
            raise PlanningError(f"sequence edge references unknown unit: {e}")
        adj[e["from"]].append(e["to"])
    _reject_cycles(adj)
    return PlanSeq(units=units, edges=edges)


def _reject_cycles(adj: dict[str, list[str]]) -> None:
    state: dict[str, int] = {}

    def visit(u: str, path: list[str]):
        state[u] = 1
        for v in adj[u]:
            if state.get(v) == 1:
                raise PlanningError(f"cyclic schedule: {' -> '.join(path + [u, v])}")
            if state.get(v, 0) == 0:
                visit(v, path + [u])
        state[u] = 2

    for u in adj:
        if state.get(u, 0) == 0:
            visit(u, [])


def generate_executable_code(
    tree: TaskTree,
    plan_seq: PlanSeq,
    api: dict[str, tuple[str, ...]],
    exemplars: tuple[Exemplar, ...],
    reasoner,
    context: dict,
) -> tuple[MissionProgram, dict[str, list[str]]]:
    """Per-leaf fragments assembled into a validated program.

    A fragment using an instruction outside its leaf role's capabilities is
    rejected; an unparseable fragment is retried once, then planning fails.
    """
    fragments: list[dict] = []
    leaf_fragments: dict[str, list[str]] = {}
    for leaf in tree.leaves():
        ref = find_most_similar_exemplar(leaf.task, exemplars)
        ask_ctx = {
            **context,
            "task": leaf.task,
            "role": leaf.role,
            "api": api.get(leaf.role, ()),
            "plan_seq": plan_seq.to_dict(),
            "exemplar_code": ref.code.to_dict(),
        }
        fragment = _ask_fragment(reasoner, ask_ctx)
        _check_fragment(fragment, leaf, api)
        fragments.append(fragment)
        leaf_fragments[leaf.task] = sorted(fragment.get("uavs", {}).keys())

    assembled = reasoner.ask("assemble", {**context, "fragments": fragments})
    try:
        program = program_from_dict(assembled)
        validate_program(program)
    except Exception as e:
        raise PlanningError(f"assembled program invalid: {e}") from e
    for leaf in tree.leaves():
        if not leaf_fragments.get(leaf.task):
            raise PlanningError(f"leaf {leaf.task!r} contributed no fragment")
    return program, leaf_fragments


def _ask_fragment(reasoner, ask_ctx: dict) -> dict:
    from .mil import instruction_from_dict

    last_err: Exception | None = None
    for _ in range(2):  # one automatic retry on malformed output
        answer = reasoner.ask("codegen_leaf", ask_ctx)
        try:
            if not isinstance(answer, dict) or "uavs" not in answer:
                raise PlanningError("fragment is not a uavs mapping")
            for instrs in answer["uavs"].values():
                for d in instrs:
                    instruction_from_dict(d)
            return answer
        except Exception as e:  # malformed: ask again once
            last_err = e
    raise PlanningError(f"code fragment unparseable after retry: {last_err}")


def _check_fragment(fragment: dict, leaf: TaskTree, api: dict[str, tuple[str, ...]]) -> None:
    allowed = set(api.get(leaf.role, ()))
    expected_uav = ROLE_TO_UAV.get(leaf.role)
    for uav, instrs in fragment.get("uavs", {}).items():
        if uav != expected_uav:
            raise PlanningError(
                f"fragment for role {leaf.role} addresses {uav}, expected {expected_uav}"
            )
        for d in instrs:
            op = d.get("op")
            if op not in allowed:
                raise PlanningError(f"op {op!r} not permitted for role {leaf.role}")


def generate_solution_package(
    intent: Intention,
    world: WorldState,
    kb: KnowledgeBase,
    exemplars: tuple[Exemplar, ...],
    reasoner,
    no_fly: tuple[Region, ...] = (),
    params: SweepParams | None = None,
) -> SolutionPackage:
    """Run the whole pipeline, recording each reasoning step for audit."""
    trace: list[CotStep] = []
    params = params or SweepParams.from_kb(kb.parameters)
    if intent.spatial_context is not None and intent.task_type == "Avoid":
        no_fly = tuple(no_fly) + (intent.spatial_context,)

    digest = world_digest(world)
    shared_ctx: dict = {
        "intent": intent,
        "world": digest,
        "world_state": world,
        "kb": kb,
        "no_fly": tuple(no_fly),
        "params": params,
    }

    try:
        domain = retrieve_knowledge(intent, kb)
        e_sim = find_most_similar_exemplar(intent.task_text(), exemplars)

        analysis = str(
            reasoner.ask(
                "analyze",
                {**shared_ctx, "domain": domain, "exemplar": e_sim.task,
                 "exemplar_cot": e_sim.cot},
            )
        )
        trace.append(CotStep(STEP_ANALYZE, analysis))

        tactics = reasoner.ask("tactics", {**shared_ctx, "analysis": analysis})
        tactics = [str(t) for t in tactics]
        trace.append(
            CotStep(
                STEP_RETRIEVE,
                "domain: "
                + ", ".join(sorted(domain.tactics) or ["-"])
                + " | constraints: "
                + ", ".join(sorted(domain.constraints))
                + " | tactics: "
                + " / ".join(tactics),
            )
        )

        tree = TaskTree(task=intent.task_text())
        recursive_decompose(tree, analysis, tactics, kb, exemplars, reasoner, 0, trace)
        tree.validate(kb)
        roles = tuple(dict.fromkeys(leaf.role for leaf in tree.leaves()))
        shared_ctx["roles"] = roles
        trace.append(
            CotStep(
                STEP_ASSIGN,
                "; ".join(f"{leaf.task} -> {leaf.role}" for leaf in tree.leaves()),
            )
        )

        plan_seq = sequence_tasks(tree, kb, reasoner, shared_ctx)
        if plan_seq.edges:
            edge_text = "; ".join(f"{e['from']}->{e['to']}" for e in plan_seq.edges)
        else:
            edge_text = "no ordering edges"
        trace.append(CotStep(STEP_SEQUENCE, f"{len(plan_seq.units)} units, {edge_text}"))

        program, leaf_fragments = generate_executable_code(
            tree, plan_seq, kb.capabilities, exemplars, reasoner, shared_ctx
        )
        sizes = {uav: len(instrs) for uav, instrs in program.uavs.items()}
        trace.append(CotStep(STEP_GENERATE, f"program instruction counts {sizes}"))
    except PlanningError as e:
        if not e.trace:
            e.trace = [s.to_dict() for s in trace]
        raise

    summary = _summarize(intent, tree, plan_seq, program, digest)
    return SolutionPackage(
        summary=summary,
        cot_trace=tuple(trace),
        task_tree=tree,
        plan_seq=plan_seq,
        program=program,
        leaf_fragments=leaf_fragments,
    )


def _summarize(intent, tree, plan_seq, program, digest) -> str:
    zone = digest.get("zone", {})
    n_units = len(plan_seq.units)
    sizes = ", ".join(f"{uav}: {len(ins)}" for uav, ins in sorted(program.uavs.items()))
    roles = ", ".join(leaf.role for leaf in tree.leaves())
    return (
        f"{intent.task_type} mission over zone at "
        f"({zone.get('center', [0, 0])[0]:.0f}, {zone.get('center', [0, 0])[1]:.0f}), "
        f"{len(tree.leaves())} task(s) assigned to {roles}; "
        f"{n_units} scheduled units, {len(plan_seq.edges)} ordering edges; "
        f"instructions: {sizes}."
    )
