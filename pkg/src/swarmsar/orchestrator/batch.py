"""Trial execution and batch aggregation.

A trial is fully described by (seed, method, reasoner, policy, overrides).
Manual trials replay a human-authored program file; the other methods run
the closed-loop session.  Batches run trials across seeds (optionally in a
process pool), write JSON-lines results plus the aggregate table, and can
persist per-trial audit logs from which a trial is replayable without any
remote endpoint.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor

from .. import guard as guard_mod
from ..errors import ReasonerUnavailable, SwarmSarError
from ..hil import AutoApprove, InteractiveBridge, Session, WindAwareRejector
from ..kb import load_default_exemplars, load_default_kb
from ..metrics import (
    MAPPED_SUCCESS_FRACTION,
    MissionResult,
    aggregate,
    render_table,
    write_results_jsonl,
)
from ..mil import load_program, program_from_json
from ..reasoner import ReplayReasoner, RuleReasoner
from ..scene import generate_scene, scene_to_dict
from ..simcore import initial_world, program_complete, step
from .config import TrialConfig
from .remote import RemoteReasoner


def make_policy(name: str):
    if name == "auto_approve":
        return AutoApprove()
    if name == "wind_aware":
        return WindAwareRejector()
    if name == "interactive":
        return InteractiveBridge()
    raise SwarmSarError(f"unknown policy {name!r}")


def make_reasoner(config: TrialConfig, kb, exemplars):
    if config.reasoner == "Rule":
        return RuleReasoner()
    return RemoteReasoner(
        config.remote,
        kb=None if config.method == "LlmDirect" else kb,
        exemplars=() if config.method == "LlmDirect" else exemplars,
        llm_direct=config.method == "LlmDirect",
    )


class RecordingReasoner:
    """Wraps a reasoner and records each exchange for audit/replay."""

    def __init__(self, inner):
        self.inner = inner
        self.name = getattr(inner, "name", "unknown")
        self.exchanges: list[dict] = []

    def ask(self, step_kind: str, context: dict):
        answer = self.inner.ask(step_kind, context)
        recorded = answer
        if hasattr(answer, "task_type"):  # intention objects serialize as XML
            from ..intent import intention_to_xml

            recorded = intention_to_xml(answer)
        self.exchanges.append({"step_kind": step_kind, "answer": recorded})
        return answer


def run_trial(seed: int, config: TrialConfig, reasoner=None, on_event=None) -> MissionResult:
    scene = generate_scene(
        seed,
        obstacle_count=config.obstacle_count,
        survivor_count=config.survivor_count,
        wind_zone_count=config.wind_zone_count,
    )
    if config.method == "Manual":
        return _run_manual(scene, config)

    kb = load_default_kb()
    exemplars = load_default_exemplars()
    if reasoner is None:
        reasoner = make_reasoner(config, kb, exemplars)
    recorder = RecordingReasoner(reasoner)
    policy = make_policy(
        "auto_approve" if config.method in ("NoFeedback", "LlmDirect") else config.policy
    )
    if config.method == "NoFeedback":
        policy.reactive = False
    log_file = open(config.trajectory_log, "w", encoding="utf-8") if config.trajectory_log else None

    def tick_hook(world):
        for uav, s in world.uavs.items():
            log_file.write(json.dumps({
                "type": "tick", "t": world.time, "uav": uav,
                "position": list(s.position), "velocity": list(s.velocity),
                "status": s.status, "instruction_index": s.instruction_index,
            }) + "\n")

    session = Session(
        scene, kb, exemplars, recorder, policy,
        max_replans=config.max_replans,
        method=config.method,
        direct=config.method == "LlmDirect",
        on_event=on_event,
        tick_hook=tick_hook if log_file else None,
    )
    try:
        result = session.run(config.utterance)
    except ReasonerUnavailable as e:
        result = MissionResult(
            success=False, failure_cause="ReasonerUnavailable",
            coverage_pct=0.0, found_pct=0.0, mission_time=session.world.time,
            seed=seed, method=config.method, policy=getattr(policy, "name", "?"),
            errored=True, error=str(e),
        )
    if log_file is not None:
        for event in session.log.events:
            log_file.write(json.dumps({"type": "event", **event}, default=str) + "\n")
        log_file.close()
    if config.audit_dir:
        _write_audit(config, seed, scene, recorder, session, result)
    return result


def _run_manual(scene, config: TrialConfig) -> MissionResult:
    """Replay a human-authored program under the same guard rules.

    Mission time is not comparable with the other methods (it excludes the
    human's authoring time), which the aggregate output flags.
    """
    with open(config.program_file, encoding="utf-8") as f:
        plan = load_program(program_from_json(f.read()))
    world = initial_world(scene)
    cause = None
    while True:
        world = step(world, plan)
        violations = guard_mod.check(world)
        if violations:
            cause = violations[0].kind
            break
        if program_complete(world, plan):
            break
    mapped = world.grid.mapped_zone_fraction() * 100.0
    found = (
        100.0 * len(world.detected_ids()) / len(scene.survivors)
        if scene.survivors
        else 0.0
    )
    success = (
        cause is None
        and mapped >= MAPPED_SUCCESS_FRACTION * 100.0
        and found >= 100.0
        and world.time <= guard_mod.T_MAX
    )
    if cause is None and not success:
        cause = "ObjectivesUnmet"
    return MissionResult(
        success=success,
        failure_cause=None if success else cause,
        coverage_pct=world.grid.searched_zone_fraction() * 100.0,
        found_pct=found,
        mapped_pct=mapped,
        mission_time=world.time,
        seed=scene.seed,
        method="Manual",
        policy="manual",
    )


def _write_audit(config, seed, scene, recorder, session, result) -> None:
    os.makedirs(config.audit_dir, exist_ok=True)
    path = os.path.join(config.audit_dir, f"trial_{config.method}_{seed}.json")
    doc = {
        "schema_version": 1,
        "seed": seed,
        "method": config.method,
        "policy": getattr(session.policy, "name", "?"),
        "utterance": config.utterance,
        "scene": scene_to_dict(scene),
        "exchanges": recorder.exchanges,
        # full request/reply pairs when the inner reasoner is remote
        "remote_exchanges": getattr(recorder.inner, "exchanges", []),
        "events": session.log.events,
        "result": result.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, default=str)


def replay_trial(audit_path: str) -> tuple[MissionResult, MissionResult, bool]:
    """Re-run a trial from its audit log (no reasoner endpoint needed);
    returns (original, replayed, results match)."""
    with open(audit_path, encoding="utf-8") as f:
        doc = json.load(f)
    from ..metrics import result_from_dict
    from ..scene import scene_from_dict

    scene = scene_from_dict(doc["scene"])
    kb = load_default_kb()
    exemplars = load_default_exemplars()
    reasoner = ReplayReasoner(doc["exchanges"])
    policy = make_policy(
        "auto_approve" if doc["method"] in ("NoFeedback", "LlmDirect") else doc["policy"]
    )
    if doc["method"] == "NoFeedback":
        policy.reactive = False
    session = Session(
        scene, kb, exemplars, reasoner, policy,
        method=doc["method"], direct=doc["method"] == "LlmDirect",
    )
    replayed = session.run(doc.get("utterance"))
    original = result_from_dict(doc["result"])
    match = (
        original.success == replayed.success
        and abs(original.mission_time - replayed.mission_time) < 1e-6
        and abs(original.coverage_pct - replayed.coverage_pct) < 1e-6
    )
    return original, replayed, match


def _trial_star(args) -> MissionResult:
    seed, config = args
    return run_trial(seed, config)


def run_batch(config: TrialConfig) -> tuple[list[MissionResult], dict]:
    """Run all seeds; returns (results, aggregate table)."""
    config.validate()
    jobs = [(seed, config) for seed in config.seeds]
    if config.workers > 1 and config.reasoner == "Rule":
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_trial_star, jobs))
    else:
        results = [run_trial(seed, config) for seed in config.seeds]
    if config.output:
        write_results_jsonl(results, config.output)
        agg_path = config.output + ".aggregate.json"
        agg = aggregate(results)
        with open(agg_path, "w", encoding="utf-8") as f:
            json.dump(agg, f, indent=2)
    else:
        agg = aggregate(results)
    if "Manual" in agg["methods"]:
        agg["warnings"].append(
            "Manual mission times exclude human authoring time and are not "
            "comparable with the other methods"
        )
    return results, agg


__all__ = [
    "run_trial",
    "run_batch",
    "replay_trial",
    "make_policy",
    "make_reasoner",
    "render_table",
]
