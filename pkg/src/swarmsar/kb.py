"""Domain knowledge base and code exemplars.

Both are editable data shipped with the package: tactics and constraints
keyed by lowercase keywords, role descriptions, per-role instruction
capabilities and the numeric sweep parameters.  Exemplars pair a task
phrase with a short rationale and a validated program fragment; they feed
similarity retrieval and remote-reasoner prompts.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .mil import MissionProgram, program_from_dict, validate_program

HARD_CONSTRAINT_KEYS = ("collision", "altitude", "link", "wind", "timeout")


@dataclass(frozen=True)
class KnowledgeBase:
    tactics: dict[str, str]
    constraints: dict[str, str]
    uav_roles: dict[str, str]
    capabilities: dict[str, tuple[str, ...]]
    parameters: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for role in self.capabilities:
            if role not in self.uav_roles:
                raise ConfigError(f"capabilities reference unknown role {role!r}")


@dataclass(frozen=True)
class Exemplar:
    task: str
    cot: tuple[str, ...]
    code: MissionProgram


def kb_from_dict(doc: dict) -> KnowledgeBase:
    return KnowledgeBase(
        tactics=dict(doc["tactics"]),
        constraints=dict(doc["constraints"]),
        uav_roles=dict(doc["uav_roles"]),
        capabilities={r: tuple(ops) for r, ops in doc["capabilities"].items()},
        parameters=dict(doc.get("parameters", {})),
    )


def load_default_kb() -> KnowledgeBase:
    text = resources.files("swarmsar.data").joinpath("kb.json").read_text("utf-8")
    return kb_from_dict(json.loads(text))


def load_kb(path: str) -> KnowledgeBase:
    with open(path, encoding="utf-8") as f:
        return kb_from_dict(json.load(f))


def exemplars_from_list(items: list[dict]) -> tuple[Exemplar, ...]:
    out = []
    for item in items:
        program = program_from_dict(item["code"])
        validate_program(program)
        out.append(
            Exemplar(task=str(item["task"]), cot=tuple(item["cot"]), code=program)
        )
    return tuple(out)


def load_default_exemplars() -> tuple[Exemplar, ...]:
    text = resources.files("swarmsar.data").joinpath("exemplars.json").read_text("utf-8")
    return exemplars_from_list(json.loads(text))


def load_exemplars(path: str) -> tuple[Exemplar, ...]:
    with open(path, encoding="utf-8") as f:
        return exemplars_from_list(json.load(f))


# --- similarity -------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def _bag(tokens: list[str]) -> dict[str, int]:
    bag: dict[str, int] = {}
    for t in tokens:
        bag[t] = bag.get(t, 0) + 1
    return bag


def cosine_similarity(a: str, b: str) -> float:
    """Cosine over term-frequency bags of lowercase alphanumeric tokens."""
    ba, bb = _bag(tokenize(a)), _bag(tokenize(b))
    dot = sum(ba[t] * bb.get(t, 0) for t in ba)
    na = sum(v * v for v in ba.values()) ** 0.5
    nb = sum(v * v for v in bb.values()) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def find_most_similar_exemplar(task: str, exemplars: tuple[Exemplar, ...]) -> Exemplar:
    """Highest cosine similarity; ties break toward the lowest index."""
    if not exemplars:
        raise ConfigError("exemplar set is empty")
    scores = [cosine_similarity(task, e.task) for e in exemplars]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return exemplars[best]
