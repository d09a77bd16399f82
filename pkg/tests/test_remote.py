"""Remote reasoner client against a local mock chat-completions server."""
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from swarmsar.errors import PlanningError, ReasonerUnavailable
from swarmsar.intent import Intention
from swarmsar.orchestrator.config import RemoteConfig
from swarmsar.orchestrator.remote import RemoteReasoner


class MockLlmServer:
    """Serves canned chat completions and records request bodies."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                outer.requests.append(body)
                if not outer.replies:
                    self.send_response(500)
                    self.end_headers()
                    return
                reply = outer.replies.pop(0)
                if reply is None:  # simulate server failure
                    self.send_response(503)
                    self.end_headers()
                    self.wfile.write(b"overloaded")
                    return
                payload = json.dumps(
                    {"choices": [{"message": {"role": "assistant", "content": reply}}]}
                ).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.server = HTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def endpoint(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


def make_reasoner(server, **kwargs):
    cfg = RemoteConfig(endpoint=server.endpoint, model="mock", timeout=5.0, max_retries=1)
    return RemoteReasoner(cfg, **kwargs)


def test_loopback_structured_answer():
    canned = {"units": [{"id": "relay", "role": "Relay", "sector": None}], "edges": []}
    server = MockLlmServer([json.dumps(canned)])
    try:
        reasoner = make_reasoner(server)
        answer = reasoner.ask("sequence", {"tree": {}})
        assert answer == canned
        assert reasoner.exchanges[0]["step_kind"] == "sequence"
    finally:
        server.close()


def test_retry_then_planning_error():
    server = MockLlmServer(["not json at all {", "still broken ["])
    try:
        reasoner = make_reasoner(server)
        with pytest.raises(PlanningError, match="malformed"):
            reasoner.ask("codegen_leaf", {"task": "x"})
        assert len(server.requests) == 2  # exactly one retry
    finally:
        server.close()


def test_retry_succeeds_on_second_attempt():
    good = {"uavs": {"UAV1": [{"op": "LAND"}]}}
    server = MockLlmServer(["garbage", json.dumps(good)])
    try:
        reasoner = make_reasoner(server)
        assert reasoner.ask("codegen_leaf", {"task": "x"}) == good
    finally:
        server.close()


def test_http_error_is_reasoner_unavailable():
    server = MockLlmServer([None])
    try:
        reasoner = make_reasoner(server)
        with pytest.raises(ReasonerUnavailable):
            reasoner.ask("analyze", {"task": "x"})
    finally:
        server.close()


def test_unreachable_endpoint():
    cfg = RemoteConfig(endpoint="http://127.0.0.1:9/v1/чат", timeout=0.5)
    reasoner = RemoteReasoner(cfg)
    with pytest.raises(ReasonerUnavailable):
        reasoner.ask("analyze", {"task": "x"})


def test_prompt_carries_kb_and_exemplar_cot(kb, exemplars):
    server = MockLlmServer(["analysis text"])
    try:
        reasoner = make_reasoner(server, kb=kb, exemplars=exemplars)
        intent = Intention(task_type="Search", target_coordinates=(0.0, 0.0))
        reasoner.ask("analyze", {"intent": intent, "task": "search the zone for survivors"})
        body = server.requests[0]
        system = body["messages"][0]["content"]
        # knowledge base extract present
        assert "lawnmower" in system.lower()
        # the most similar exemplar's reasoning text is in the prompt
        search_ex = next(e for e in exemplars if e.task.startswith("search"))
        assert search_ex.cot[0] in system
        assert json.dumps(search_ex.code.to_dict()) in system
    finally:
        server.close()


def test_llm_direct_end_to_end_trial():
    # a canned (tiny but valid) program drives the whole direct-method path
    program = {
        "uavs": {
            "UAV1": [
                {"op": "TAKEOFF", "args": {"alt": 100.0}},
                {"op": "GOTO", "args": {"x": 100.0, "y": 100.0, "z": 100.0}},
                {"op": "LAND"},
            ]
        }
    }
    # grounding asks once, then full_program
    ground_xml = (
        '<intention schema_version="1"><task_type>Map</task_type>'
        '<target><coordinates x="0.0" y="0.0"/></target>'
        "<priority>3</priority><constraints></constraints></intention>"
    )
    server = MockLlmServer([ground_xml, json.dumps(program)])
    try:
        from swarmsar.orchestrator.batch import run_trial
        from swarmsar.orchestrator.config import TrialConfig

        cfg = TrialConfig(
            seeds=(3,), method="LlmDirect", reasoner="Remote",
            wind_zone_count=0,
            remote=RemoteConfig(endpoint=server.endpoint, timeout=5.0),
        )
        result = run_trial(3, cfg)
        # the toy program flies but cannot meet the objectives
        assert not result.success
        assert result.failure_cause == "ObjectivesUnmet"
        assert not result.errored
    finally:
        server.close()


def test_llm_direct_invalid_program_fails_trial():
    ground_xml = (
        '<intention schema_version="1"><task_type>Map</task_type>'
        '<target><coordinates x="0.0" y="0.0"/></target>'
        "<priority>3</priority><constraints></constraints></intention>"
    )
    bad = {"uavs": {"UAV1": [{"op": "WARP", "args": {}}]}}
    server = MockLlmServer([ground_xml, json.dumps(bad), json.dumps(bad)])
    try:
        from swarmsar.orchestrator.batch import run_trial
        from swarmsar.orchestrator.config import TrialConfig

        cfg = TrialConfig(
            seeds=(3,), method="LlmDirect", reasoner="Remote",
            wind_zone_count=0,
            remote=RemoteConfig(endpoint=server.endpoint, timeout=5.0),
        )
        result = run_trial(3, cfg)
        assert not result.success
        assert result.failure_cause == "PlanningError"
        assert not result.errored  # a bad plan is a mission failure, not infra
    finally:
        server.close()


def test_remote_pipeline_matches_rule_reasoner(kb, exemplars):
    # serve the rule reasoner's own answers through the HTTP path: the
    # pipeline must parse every step kind and assemble the identical program
    from swarmsar import simcore as S
    from swarmsar.planner import generate_solution_package
    from swarmsar.reasoner import RuleReasoner
    from swarmsar.regions import Circle
    from swarmsar.scene import generate_scene
    from swarmsar.intent import Intention

    world = S.initial_world(generate_scene(7, wind_zone_count=0))
    zone = world.scene.zone
    intent = Intention(
        task_type="Composite", priority=3,
        spatial_context=Circle(zone.center[0], zone.center[1], zone.radius),
    )

    class Recorder:
        def __init__(self):
            self.inner = RuleReasoner()
            self.log = []

        def ask(self, step_kind, context):
            answer = self.inner.ask(step_kind, context)
            self.log.append((step_kind, answer))
            return answer

    rec = Recorder()
    rule_pkg = generate_solution_package(intent, world, kb, exemplars, rec)

    replies = []
    for step_kind, answer in rec.log:
        if step_kind in ("analyze", "assign_role"):
            replies.append(str(answer))
        elif step_kind == "is_atomic":
            replies.append("true" if answer else "false")
        else:
            replies.append(json.dumps(answer))
    server = MockLlmServer(replies)
    try:
        remote = make_reasoner(server, kb=kb, exemplars=exemplars)
        remote_pkg = generate_solution_package(intent, world, kb, exemplars, remote)
        assert remote_pkg.program == rule_pkg.program
        assert [s.kind for s in remote_pkg.cot_trace] == [
            s.kind for s in rule_pkg.cot_trace
        ]
    finally:
        server.close()


def test_llm_direct_omits_kb_and_exemplars(kb, exemplars):
    server = MockLlmServer(["whatever"])
    try:
        reasoner = make_reasoner(server, kb=kb, exemplars=exemplars, llm_direct=True)
        reasoner.ask("analyze", {"task": "search"})
        system = server.requests[0]["messages"][0]["content"]
        assert "Knowledge base" not in system
        assert "Worked example" not in system
    finally:
        server.close()
