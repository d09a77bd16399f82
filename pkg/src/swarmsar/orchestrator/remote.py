"""Chat-completions client acting as a remote reasoner.

Each planner question becomes one chat request: the system message carries
the knowledge-base extract, an instruction-language reference and the task
exemplar most similar to the current step (all omitted in LLM-direct
ablation mode); the user message holds the step context.  Replies must
contain the step's structured answer; a malformed reply is retried once
and then surfaces as a planning failure.  Every exchange is recorded so a
trial can be audited and replayed without the endpoint.
"""
from __future__ import annotations

import json
import re

import requests

from ..errors import PlanningError, ReasonerUnavailable
from ..intent import ContextPackage
from ..kb import Exemplar, KnowledgeBase, find_most_similar_exemplar
from .config import RemoteConfig

MIL_REFERENCE = (
    "Programs are JSON: {\"uavs\": {\"UAV1\": [instr...], ...}}. An instruction is "
    "{\"op\": ..., \"args\": {...}, \"wait_for\": [labels]}. Ops: TAKEOFF(alt), "
    "GOTO(x,y,z), LAWNMOWER(region, lane_spacing, alt), ORBIT(center, radius, alt, "
    "revolutions), LOITER(x,y,z,duration), RELAY_TRACK(targets, alt, clamp_center, "
    "clamp_radius), LAND, EMIT(label). Regions are {\"shape\":\"rect\",x0,y0,x1,y1} "
    "or {\"shape\":\"circle\",cx,cy,r}. Labels are produced only by EMIT and every "
    "wait_for must reference an emitted label; the wait graph must be acyclic."
)

_STEP_PROMPTS = {
    "ground": "Ground the operator input into intention XML "
              "(<intention schema_version=\"1\">...).  Reply with the XML only.",
    "analyze": "Analyze the intent against the world state. Reply with one short "
               "paragraph of analysis text.",
    "tactics": "Identify the applicable tactics. Reply with a JSON array of tactic "
               "descriptions.",
    "is_atomic": "Is this task atomic (one UAV role can execute it)? Reply with "
                 "JSON true or false.",
    "decompose": "Decompose the task into subtasks, one per UAV role involved. "
                 "Reply with a JSON array of subtask strings.",
    "assign_role": "Assign the single best UAV role for this task. Reply with the "
                   "role name only.",
    "sequence": "Sequence the scheduled units. Reply with JSON "
                "{\"units\": [{\"id\",\"role\",\"sector\"}...], \"edges\": "
                "[{\"from\",\"to\",\"label\"}...]}.",
    "codegen_leaf": "Generate the instruction fragment for this task. Reply with "
                    "JSON {\"uavs\": {<uav id>: [instructions...]}}.",
    "assemble": "Assemble the fragments into one program. Reply with JSON "
                "{\"uavs\": {...}, \"no_fly\": [...]}.",
    "full_program": "Write the complete mission program for the three UAVs. Reply "
                    "with JSON {\"uavs\": {...}}.",
}


class RemoteReasoner:
    """Reasoner backed by a chat-completions HTTP endpoint."""

    def __init__(
        self,
        config: RemoteConfig,
        kb: KnowledgeBase | None = None,
        exemplars: tuple[Exemplar, ...] = (),
        llm_direct: bool = False,
        session: requests.Session | None = None,
    ):
        self.config = config
        self.kb = kb
        self.exemplars = exemplars
        self.llm_direct = llm_direct
        self.exchanges: list[dict] = []
        self._http = session or requests.Session()
        self.name = "llm_direct" if llm_direct else "remote"

    def ask(self, step_kind: str, context: dict):
        prompt = _STEP_PROMPTS.get(step_kind)
        if prompt is None:
            raise PlanningError(f"remote reasoner has no prompt for {step_kind!r}")
        messages = self._messages(step_kind, prompt, context)
        last_err: Exception | None = None
        for _ in range(1 + max(0, self.config.max_retries)):
            content = self._request(messages)
            try:
                answer = _parse_answer(step_kind, content)
            except Exception as e:  # schema failure: retry once
                last_err = e
                continue
            self.exchanges.append(
                {"step_kind": step_kind, "request": messages, "reply": content,
                 "answer": answer}
            )
            return answer
        raise PlanningError(f"remote reasoner returned malformed {step_kind}: {last_err}")

    # -- internals -------------------------------------------------------------

    def _messages(self, step_kind: str, prompt: str, context: dict) -> list[dict]:
        system_parts = ["You plan missions for a three-UAV search-and-rescue swarm."]
        if not self.llm_direct and self.kb is not None:
            system_parts.append("Knowledge base tactics: " + json.dumps(self.kb.tactics))
            system_parts.append(
                "Operational constraints: " + json.dumps(self.kb.constraints)
            )
            system_parts.append("UAV roles: " + json.dumps(self.kb.uav_roles))
            system_parts.append("Role capabilities: " + json.dumps(
                {r: list(c) for r, c in self.kb.capabilities.items()}
            ))
        system_parts.append(MIL_REFERENCE)
        if not self.llm_direct and self.exemplars:
            task = str(context.get("task") or _intent_text(context))
            ex = find_most_similar_exemplar(task, self.exemplars)
            system_parts.append(
                "Worked example:\nTask: " + ex.task
                + "\nReasoning: " + " ".join(ex.cot)
                + "\nCode: " + json.dumps(ex.code.to_dict())
            )
        user = prompt + "\n\nContext:\n" + json.dumps(_safe_context(context), default=str)
        return [
            {"role": "system", "content": "\n\n".join(system_parts)},
            {"role": "user", "content": user},
        ]

    def _request(self, messages: list[dict]) -> str:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        body = {"model": self.config.model, "messages": messages}
        try:
            resp = self._http.post(
                self.config.endpoint, json=body, headers=headers,
                timeout=self.config.timeout,
            )
        except requests.RequestException as e:
            raise ReasonerUnavailable(f"remote reasoner unreachable: {e}") from e
        if resp.status_code >= 400:
            raise ReasonerUnavailable(
                f"remote reasoner HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except Exception as e:
            raise ReasonerUnavailable(f"malformed completion envelope: {e}") from e


def _intent_text(context: dict) -> str:
    intent = context.get("intent")
    if intent is not None and hasattr(intent, "task_text"):
        return intent.task_text()
    ctx = context.get("context")
    if isinstance(ctx, ContextPackage):
        return ctx.latest_utterance
    return ""


def _safe_context(context: dict) -> dict:
    out = {}
    for k, v in context.items():
        if k.startswith("_") or k in ("kb", "world_state", "params"):
            continue
        if isinstance(v, ContextPackage):
            out[k] = {
                "latest_utterance": v.latest_utterance,
                "image_annotations": [a.to_dict() for a in v.image_annotations],
                "dialogue_history": list(v.dialogue_history),
                "world_snapshot": v.world_snapshot,
            }
        elif hasattr(v, "to_dict"):
            out[k] = v.to_dict()
        elif hasattr(v, "task_text"):
            out[k] = v.task_text()
        else:
            out[k] = v
    return out


_JSON_RE = re.compile(r"(\{.*\}|\[.*\]|true|false)", re.DOTALL)


def _extract_json(content: str):
    m = _JSON_RE.search(content)
    if not m:
        raise ValueError("no JSON found in reply")
    return json.loads(m.group(1))


def _parse_answer(step_kind: str, content: str):
    if step_kind in ("ground", "analyze", "assign_role"):
        return content.strip()
    value = _extract_json(content)
    if step_kind == "is_atomic":
        if not isinstance(value, bool):
            raise ValueError("is_atomic must be true/false")
        return value
    if step_kind in ("tactics", "decompose"):
        if not isinstance(value, list):
            raise ValueError(f"{step_kind} must be a JSON array")
        return value
    if not isinstance(value, dict):
        raise ValueError(f"{step_kind} must be a JSON object")
    return value
