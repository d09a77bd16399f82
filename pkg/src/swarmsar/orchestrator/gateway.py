"""HTTP gateway serving the operator console.

One session = one mission running on a background thread.  The console
creates a session, submits intent, reviews the proposed package, and
approves or rejects; everything the session does is mirrored onto a
per-session event stream (server-sent events) with strictly increasing
sequence numbers and replay from any cursor, so a reconnecting client
never sees a gap.
"""
from __future__ import annotations

import json
import threading
import time
import uuid

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse

from ..errors import SwarmSarError
from ..hil import DONE, FAILED, IDLE, PROPOSED, REPLANNING, InteractiveBridge, Session
from ..kb import load_default_exemplars, load_default_kb
from ..reasoner import RuleReasoner
from ..scene import generate_scene
from ..simcore import world_digest
from .batch import make_policy, make_reasoner
from .config import trial_config_from_dict

TELEMETRY_EVERY_TICKS = 2  # one telemetry frame per sim second


class GatewaySession:
    """A running mission plus its append-only event log."""

    def __init__(self, session_id: str, session: Session, bridge: InteractiveBridge | None,
                 pace: float):
        self.id = session_id
        self.session = session
        self.bridge = bridge
        self.pace = pace
        self.events: list[dict] = []
        self._cv = threading.Condition()
        self._tick_count = 0
        self.thread: threading.Thread | None = None
        self.result = None
        self.utterance: str | None = None
        self.annotations: list[dict] = []
        self._intent_cv = threading.Condition()

    # -- event stream -----------------------------------------------------------

    def publish(self, kind: str, payload: dict) -> None:
        with self._cv:
            self.events.append(
                {
                    "session_id": self.id,
                    "seq": len(self.events),
                    "kind": kind,
                    "payload": payload,
                }
            )
            self._cv.notify_all()

    def events_from(self, cursor: int):
        """Yield events with seq >= cursor, blocking for new ones."""
        while True:
            with self._cv:
                while cursor >= len(self.events):
                    done = self.session.phase in (DONE, FAILED)
                    if done:
                        return
                    self._cv.wait(timeout=0.5)
                batch = self.events[cursor:]
                cursor = len(self.events)
            for ev in batch:
                yield ev
                if ev["kind"] == "MissionEnd":
                    return

    # -- session plumbing ---------------------------------------------------------

    def on_session_event(self, event: dict) -> None:
        kind = event.get("kind")
        payload = {k: v for k, v in event.items() if k != "kind"}
        if kind == "PlanProposed" and self.session.package is not None:
            payload["package"] = self.session.package.to_dict()
        if kind in ("PlanProposed", "Decision", "PhaseChange", "MissionEnd"):
            self.publish(kind, payload)
        else:  # detections, hazards, violations, grounding notes
            self.publish("Telemetry", {"event": kind, **payload})

    def on_tick(self, world) -> None:
        self._tick_count += 1
        if self._tick_count % TELEMETRY_EVERY_TICKS == 0:
            self.publish("Telemetry", world_digest(world))
        if self.pace > 0:
            time.sleep(0.5 / self.pace)

    def submit_intent(self, utterance: str, annotations: list[dict]) -> None:
        with self._intent_cv:
            self.utterance = utterance
            self.annotations = annotations
            self._intent_cv.notify_all()

    def wait_for_intent(self, timeout: float = 600.0) -> tuple[str, list[dict]]:
        with self._intent_cv:
            while self.utterance is None:
                if not self._intent_cv.wait(timeout=timeout):
                    raise SwarmSarError("no intent submitted")
            return self.utterance, self.annotations

    def run(self) -> None:
        try:
            utterance, annotations = self.wait_for_intent()
            self.result = self.session.run(utterance, annotations)
        except Exception as e:  # surface crashes onto the stream
            self.publish("MissionEnd", {"error": str(e)})


def create_app(default_pace: float = 0.0) -> FastAPI:
    app = FastAPI(title="swarmsar gateway")
    sessions: dict[str, GatewaySession] = {}

    def get_session(session_id: str) -> GatewaySession:
        gs = sessions.get(session_id)
        if gs is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return gs

    @app.post("/sessions")
    def create_session(body: dict = Body(default={})):
        try:
            config = trial_config_from_dict(
                {"policy": "interactive", **body}
            )
        except SwarmSarError as e:
            raise HTTPException(status_code=422, detail=str(e))
        seed = config.seeds[0]
        scene = generate_scene(
            seed,
            obstacle_count=config.obstacle_count,
            survivor_count=config.survivor_count,
            wind_zone_count=config.wind_zone_count,
        )
        kb = load_default_kb()
        exemplars = load_default_exemplars()
        if config.reasoner == "Rule":
            reasoner = RuleReasoner()
        else:
            reasoner = make_reasoner(config, kb, exemplars)
        policy = make_policy(config.policy)
        bridge = policy if isinstance(policy, InteractiveBridge) else None
        session_id = uuid.uuid4().hex[:12]
        gs = GatewaySession(session_id, None, bridge, float(body.get("pace", default_pace)))
        session = Session(
            scene, kb, exemplars, reasoner, policy,
            max_replans=config.max_replans,
            method=config.method,
            direct=config.method == "LlmDirect",
            on_event=gs.on_session_event,
            tick_hook=gs.on_tick,
        )
        gs.session = session
        sessions[session_id] = gs
        gs.thread = threading.Thread(target=gs.run, daemon=True)
        gs.thread.start()
        return {"session_id": session_id, "seed": seed, "phase": session.phase}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        gs = get_session(session_id)
        return {
            "session_id": session_id,
            "phase": gs.session.phase,
            "world": world_digest(gs.session.world),
            "constraints": [c.to_dict() for c in gs.session.constraints],
        }

    @app.post("/sessions/{session_id}/intent")
    def post_intent(session_id: str, body: dict = Body(...)):
        gs = get_session(session_id)
        if gs.session.phase != IDLE:
            raise HTTPException(
                status_code=409,
                detail=f"intent already submitted; session is {gs.session.phase}",
            )
        utterance = body.get("utterance", "")
        annotations = body.get("annotations", [])
        gs.submit_intent(utterance, annotations)
        return {"accepted": True}

    @app.get("/sessions/{session_id}/plan")
    def get_plan(session_id: str):
        gs = get_session(session_id)
        if gs.session.package is None:
            raise HTTPException(status_code=404, detail="no plan proposed yet")
        return gs.session.package.to_dict()

    @app.post("/sessions/{session_id}/decision")
    def post_decision(session_id: str, body: dict = Body(...)):
        gs = get_session(session_id)
        if gs.bridge is None:
            raise HTTPException(
                status_code=409, detail="session policy is not interactive"
            )
        phase = gs.session.phase
        if phase not in (PROPOSED, REPLANNING):
            raise HTTPException(
                status_code=409,
                detail=f"decision not accepted in phase {phase}",
            )
        decision = body.get("decision")
        if decision not in ("approve", "reject"):
            raise HTTPException(status_code=422, detail="decision must be approve|reject")
        feedback = body.get("feedback", "")
        if decision == "reject" and not feedback.strip():
            raise HTTPException(status_code=422, detail="a rejection requires feedback")
        gs.bridge.submit(decision == "approve", feedback)
        return {"accepted": True}

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, from_seq: int = Query(default=0)):
        gs = get_session(session_id)

        def stream():
            for ev in gs.events_from(from_seq):
                yield f"id: {ev['seq']}\ndata: {json.dumps(ev)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "sessions": len(sessions)}

    return app


def serve_gateway(host: str = "127.0.0.1", port: int = 8400, pace: float = 0.0) -> None:
    import uvicorn

    uvicorn.run(create_app(default_pace=pace), host=host, port=port, log_level="warning")
