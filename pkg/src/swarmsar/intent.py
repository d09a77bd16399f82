"""Grounding of operator inputs into a structured intention document.

A context package bundles everything known at the moment of an utterance:
the text itself, map annotations, the dialogue history and a world digest
(UAV states plus currently knowable objects).  Grounding turns that into
an intention with a task type, an optional target, a priority, constraint
key/values and a spatial scope, serialized as a small fixed XML grammar.

The rule-based grounding path is deterministic keyword and annotation
matching; output from any reasoner is schema-validated before it is
accepted, so malformed intents never propagate downstream.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import GroundingError, IntentFormatError
from .regions import Circle, Rect, Region, parse_geometry_phrases

TASK_TYPES = ("Map", "Search", "Relay", "Avoid", "Composite")

DEFAULT_PRIORITY = 3


@dataclass(frozen=True)
class Annotation:
    shape: str  # circle | rect | point
    coordinates: tuple[float, ...]  # circle: (cx,cy,r); rect: (x0,y0,x1,y1); point: (x,y)

    def region(self) -> Region:
        if self.shape == "circle":
            cx, cy, r = self.coordinates
            return Circle(cx, cy, r)
        if self.shape == "rect":
            x0, y0, x1, y1 = self.coordinates
            return Rect(x0, y0, x1, y1)
        x, y = self.coordinates
        return Circle(x, y, 25.0)  # a point marks a small area of interest

    def to_dict(self) -> dict:
        return {"shape": self.shape, "coordinates": list(self.coordinates)}


def annotation_from_dict(d: dict) -> Annotation:
    return Annotation(shape=d["shape"], coordinates=tuple(float(v) for v in d["coordinates"]))


@dataclass(frozen=True)
class ContextPackage:
    latest_utterance: str
    image_annotations: tuple[Annotation, ...] = ()
    dialogue_history: tuple[tuple[str, str, float], ...] = ()  # (speaker, text, time)
    world_snapshot: dict = field(default_factory=dict)

    def __post_init__(self):
        times = [t for _, _, t in self.dialogue_history]
        if times != sorted(times):
            raise GroundingError("dialogue history must be time-ordered")


@dataclass(frozen=True)
class Intention:
    task_type: str
    target_object_id: str | None = None
    target_coordinates: tuple[float, float] | None = None
    priority: int = DEFAULT_PRIORITY
    constraints: tuple[tuple[str, str], ...] = ()
    spatial_context: Region | None = None

    def validate(self) -> None:
        if self.task_type not in TASK_TYPES:
            raise IntentFormatError(f"unknown task_type {self.task_type!r}")
        if not 1 <= self.priority <= 5:
            raise IntentFormatError(f"priority {self.priority} outside [1, 5]")
        if (
            self.task_type != "Composite"
            and self.target_object_id is None
            and self.target_coordinates is None
        ):
            raise IntentFormatError("target requires object_id or coordinates")

    def task_text(self) -> str:
        """Short text rendering used for exemplar similarity and task trees."""
        parts = [self.task_type.lower()]
        if self.target_object_id:
            parts.append(self.target_object_id)
        elif self.task_type == "Composite":
            parts.append("map, search and relay over the disaster zone")
        else:
            parts.append("the designated area")
        for key, _ in self.constraints:
            parts.append(key)
        return " ".join(parts)


# --- XML round trip ---------------------------------------------------------

def intention_to_xml(intent: Intention) -> str:
    """Canonical serialization; byte-stable for identical intents."""
    intent.validate()
    lines = ['<intention schema_version="1">']
    lines.append(f"  <task_type>{intent.task_type}</task_type>")
    if intent.target_object_id is not None or intent.target_coordinates is not None:
        lines.append("  <target>")
        if intent.target_object_id is not None:
            lines.append(f"    <object_id>{intent.target_object_id}</object_id>")
        if intent.target_coordinates is not None:
            x, y = intent.target_coordinates
            lines.append(f'    <coordinates x="{x!r}" y="{y!r}"/>')
        lines.append("  </target>")
    lines.append(f"  <priority>{intent.priority}</priority>")
    lines.append("  <constraints>")
    for key, value in intent.constraints:
        lines.append(f'    <constraint key="{key}" value="{value}"/>')
    lines.append("  </constraints>")
    if intent.spatial_context is not None:
        lines.append("  <spatial_context>")
        r = intent.spatial_context
        if isinstance(r, Circle):
            lines.append(f'    <circle cx="{r.cx!r}" cy="{r.cy!r}" r="{r.r!r}"/>')
        else:
            lines.append(
                f'    <rect x0="{r.x0!r}" y0="{r.y0!r}" x1="{r.x1!r}" y1="{r.y1!r}"/>'
            )
        lines.append("  </spatial_context>")
    lines.append("</intention>")
    return "\n".join(lines) + "\n"


_KNOWN_CHILDREN = {"task_type", "target", "priority", "constraints", "spatial_context"}


def xml_to_intention(text: str) -> Intention:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise IntentFormatError(f"malformed XML at {e.position}: {e.msg}") from e
    if root.tag != "intention":
        raise IntentFormatError(f"root element must be intention, got {root.tag!r}")
    for child in root:
        if child.tag not in _KNOWN_CHILDREN:
            raise IntentFormatError(f"unknown element {child.tag!r}")

    tt = root.find("task_type")
    if tt is None or not (tt.text or "").strip():
        raise IntentFormatError("missing task_type")

    object_id = None
    coordinates = None
    target = root.find("target")
    if target is not None:
        oid = target.find("object_id")
        if oid is not None and (oid.text or "").strip():
            object_id = oid.text.strip()
        coords = target.find("coordinates")
        if coords is not None:
            coordinates = (float(coords.get("x")), float(coords.get("y")))

    prio_el = root.find("priority")
    priority = int((prio_el.text or "").strip()) if prio_el is not None else DEFAULT_PRIORITY

    constraints = []
    cons = root.find("constraints")
    if cons is not None:
        for c in cons:
            if c.tag != "constraint":
                raise IntentFormatError(f"unknown element {c.tag!r} in constraints")
            constraints.append((c.get("key", ""), c.get("value", "")))

    spatial = None
    sc = root.find("spatial_context")
    if sc is not None:
        for el in sc:
            if el.tag == "circle":
                spatial = Circle(float(el.get("cx")), float(el.get("cy")), float(el.get("r")))
            elif el.tag == "rect":
                spatial = Rect(
                    float(el.get("x0")), float(el.get("y0")),
                    float(el.get("x1")), float(el.get("y1")),
                )
            else:
                raise IntentFormatError(f"unknown element {el.tag!r} in spatial_context")

    intent = Intention(
        task_type=tt.text.strip(),
        target_object_id=object_id,
        target_coordinates=coordinates,
        priority=priority,
        constraints=tuple(constraints),
        spatial_context=spatial,
    )
    intent.validate()
    return intent


# --- rule-based grounding ---------------------------------------------------

_TASK_KEYWORDS = {
    "Map": ("map", "mapping", "survey", "inspect", "assess"),
    "Search": ("search", "scan", "find", "locate", "survivor", "survivors", "rescue"),
    "Relay": ("relay", "comms", "communication", "communications", "link"),
    "Avoid": ("avoid", "keep", "stay"),
}
_THERMAL_WORDS = ("thermal", "infrared", "heat", "survivor", "survivors")
_URGENT_WORDS = ("urgent", "urgently", "immediately", "critical", "asap")
_LOW_WORDS = ("eventually", "whenever", "low priority")
_COMPOSITE_WORDS = ("mission", "everything", "full", "unified", "all three")


def _zone_of(snapshot: dict) -> tuple[float, float, float]:
    zone = snapshot.get("zone", {})
    cx, cy = zone.get("center", (0.0, 0.0))
    return float(cx), float(cy), float(zone.get("radius", 500.0))


def rule_ground(ctx: ContextPackage) -> Intention:
    """Deterministic keyword/annotation grounding."""
    text = ctx.latest_utterance.lower()
    tokens = set(text.replace(",", " ").replace(".", " ").split())
    if not ctx.latest_utterance.strip() and not ctx.image_annotations:
        raise GroundingError("empty utterance and no annotations")

    matched = {
        task
        for task, words in _TASK_KEYWORDS.items()
        if any(w in tokens for w in words)
    }
    if "Avoid" in matched and "avoid" not in tokens:
        # "keep"/"stay" count only in avoidance phrasings
        if not any(p in text for p in ("keep out", "keep away", "stay out", "stay away", "stay clear")):
            matched.discard("Avoid")
    if any(w in text for w in _COMPOSITE_WORDS) and "Avoid" not in matched:
        matched.update({"Map", "Search", "Relay"})

    if "Avoid" in matched:
        task_type = "Avoid"
    elif len(matched - {"Avoid"}) >= 2:
        task_type = "Composite"
    elif matched:
        task_type = next(iter(matched))
    else:
        raise GroundingError(
            "could not infer a task type from the utterance",
            candidates=sorted(TASK_TYPES),
        )

    cx, cy, zr = _zone_of(ctx.world_snapshot)
    known = {
        str(o.get("object_id")): o
        for o in ctx.world_snapshot.get("objects", [])
    }

    # explicit object references
    object_id = None
    for tok in ctx.latest_utterance.replace(",", " ").split():
        t = tok.strip(".!?").upper()
        if "_" in t and any(ch.isdigit() for ch in t):
            if t in known:
                object_id = t
            else:
                raise GroundingError(
                    f"unknown object reference {t}", candidates=sorted(known)
                )

    # spatial context: annotations take precedence over text geometry
    spatial: Region | None = None
    if ctx.image_annotations:
        spatial = ctx.image_annotations[0].region()
    else:
        phrases = parse_geometry_phrases(ctx.latest_utterance, cx, cy, zr)
        if phrases:
            spatial = phrases[0]
        elif any(w in tokens for w in ("zone", "area", "everywhere", "disaster")):
            spatial = Circle(cx, cy, zr)

    # bind annotation to a knowable object when the utterance is deictic
    if spatial is not None and object_id is None and ("this" in tokens or "that" in tokens):
        inside = [
            oid
            for oid, o in known.items()
            if spatial.contains(o["coordinates"][0], o["coordinates"][1])
        ]
        if len(inside) == 1:
            object_id = inside[0]
        elif len(inside) > 1:
            raise GroundingError(
                "annotation covers several known objects", candidates=sorted(inside)
            )

    if spatial is None and task_type in ("Map", "Search", "Composite"):
        spatial = Circle(cx, cy, zr)
    if spatial is None and task_type == "Avoid":
        raise GroundingError("avoidance request names no region")

    constraints: list[tuple[str, str]] = []
    if task_type in ("Search", "Composite") or any(w in tokens for w in _THERMAL_WORDS):
        constraints.append(("use_thermal_imaging", "true"))
    if task_type == "Avoid" and spatial is not None:
        constraints.append(("no_fly", _region_text(spatial)))

    priority = DEFAULT_PRIORITY
    if any(w in text for w in _URGENT_WORDS):
        priority = 5
    elif any(w in text for w in _LOW_WORDS):
        priority = 2

    coordinates = None
    if object_id is not None and object_id in known:
        ox, oy = known[object_id]["coordinates"][0], known[object_id]["coordinates"][1]
        coordinates = (float(ox), float(oy))
    elif spatial is not None:
        coordinates = _region_center(spatial)

    intent = Intention(
        task_type=task_type,
        target_object_id=object_id,
        target_coordinates=coordinates,
        priority=priority,
        constraints=tuple(constraints),
        spatial_context=spatial,
    )
    intent.validate()
    return intent


def _region_center(region: Region) -> tuple[float, float]:
    if isinstance(region, Circle):
        return (region.cx, region.cy)
    return ((region.x0 + region.x1) / 2.0, (region.y0 + region.y1) / 2.0)


def _region_text(region: Region) -> str:
    if isinstance(region, Circle):
        return f"circle({region.cx},{region.cy},{region.r})"
    return f"rect({region.x0},{region.y0},{region.x1},{region.y1})"


def ground_intent(ctx: ContextPackage, reasoner) -> Intention:
    """Ground a context package via the given reasoner; output is always
    schema-validated before acceptance."""
    answer = reasoner.ask("ground", {"context": ctx})
    if isinstance(answer, Intention):
        intent = answer
        intent.validate()
    elif isinstance(answer, str):
        try:
            intent = xml_to_intention(answer)
        except IntentFormatError as e:
            raise GroundingError(f"reasoner returned invalid intention XML: {e}") from e
    else:
        raise GroundingError(f"reasoner returned unsupported answer type {type(answer)!r}")
    return intent
