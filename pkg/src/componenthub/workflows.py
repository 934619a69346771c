"""Structure-only workflow descriptors extracted from workflow files.

The descriptor captures steps, their ports, and dataflow edges; nothing
about execution semantics. Two dialects are read: the structural subset of
CWL, and a plain YAML steps list. Expressions, requirements and scatter
hints in CWL are kept as opaque strings on the step; they never influence
the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import CyclicWorkflow, ParseFailure, UnsupportedDialect

DIALECTS = ("cwl", "generic-yaml-steps")


@dataclass
class AbstractStep:
    id: str
    tool_hint: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)


@dataclass
class AbstractWorkflowDescriptor:
    steps: list[AbstractStep] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    parameters: list[dict[str, str]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "steps": [
                {
                    "id": s.id,
                    "tool_hint": s.tool_hint,
                    "inputs": list(s.inputs),
                    "outputs": list(s.outputs),
                }
                for s in self.steps
            ],
            "edges": [{"from": a, "to": b} for a, b in self.edges],
            "parameters": list(self.parameters),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_json(), sort_keys=False)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AbstractWorkflowDescriptor":
        return cls(
            steps=[
                AbstractStep(
                    id=s["id"],
                    tool_hint=s.get("tool_hint", ""),
                    inputs=list(s.get("inputs", [])),
                    outputs=list(s.get("outputs", [])),
                )
                for s in data.get("steps", [])
            ],
            edges=[(e["from"], e["to"]) for e in data.get("edges", [])],
            parameters=list(data.get("parameters", [])),
        )


def port_id(step: str, port: str) -> str:
    return f"{step}/{port}"


def extract_abstract_workflow(main_file: bytes, dialect_hint: str) -> AbstractWorkflowDescriptor:
    """Parse workflow bytes into a validated, acyclic descriptor.

    Deterministic: the same bytes and hint always yield an identical
    descriptor (steps in declaration order, edges sorted).
    """
    if dialect_hint not in DIALECTS:
        raise UnsupportedDialect(f"unsupported dialect {dialect_hint!r}")
    try:
        data = yaml.safe_load(main_file.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseFailure("workflow file is not UTF-8 text", location="byte stream") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        location = f"line {mark.line + 1}" if mark else "document"
        raise ParseFailure(f"YAML parse error: {exc}", location=location) from exc
    if not isinstance(data, dict):
        raise ParseFailure("workflow document must be a mapping", location="document root")

    if dialect_hint == "cwl":
        descriptor = _extract_cwl(data)
    else:
        descriptor = _extract_generic(data)

    _validate_descriptor(descriptor)
    descriptor.edges.sort()
    return descriptor


# -- CWL structural subset ---------------------------------------------------


def _named_items(value: Any, location: str) -> list[tuple[str, dict]]:
    """CWL allows maps keyed by id or lists with explicit id fields."""
    if value is None:
        return []
    items: list[tuple[str, dict]] = []
    if isinstance(value, dict):
        for key, entry in value.items():
            if entry is None or isinstance(entry, str):
                entry = {"type": entry} if entry else {}
            if not isinstance(entry, dict):
                entry = {"value": entry}
            items.append((str(key), entry))
    elif isinstance(value, list):
        for entry in value:
            if isinstance(entry, str):
                items.append((entry, {}))
            elif isinstance(entry, dict) and "id" in entry:
                items.append((str(entry["id"]), entry))
            else:
                raise ParseFailure("list entry without id", location=location)
    else:
        raise ParseFailure(f"{location} must be a map or list", location=location)
    return items


def _extract_cwl(data: dict) -> AbstractWorkflowDescriptor:
    if str(data.get("class", "")).lower() != "workflow":
        raise ParseFailure("CWL document is not a Workflow", location="class")

    parameters = [
        {"id": name, "type_hint": _type_hint(entry)}
        for name, entry in _named_items(data.get("inputs"), "inputs")
    ]

    steps: list[AbstractStep] = []
    edges: list[tuple[str, str]] = []
    step_items = _named_items(data.get("steps"), "steps")
    step_ids = {name for name, _ in step_items}
    for name, entry in step_items:
        run = entry.get("run", "")
        tool_hint = run if isinstance(run, str) else str(run.get("id", "inline"))
        inputs: list[str] = []
        for in_name, in_entry in _named_items(entry.get("in"), f"steps/{name}/in"):
            consumer = port_id(name, in_name)
            inputs.append(consumer)
            for source in _sources(in_entry):
                head = source.split("/", 1)[0]
                if "/" in source and head in step_ids:
                    edges.append((source, consumer))
        outputs = []
        for out_name, _ in _named_items(entry.get("out"), f"steps/{name}/out"):
            outputs.append(port_id(name, out_name))
        steps.append(AbstractStep(id=name, tool_hint=tool_hint, inputs=inputs, outputs=outputs))

    return AbstractWorkflowDescriptor(steps=steps, edges=edges, parameters=parameters)


def _type_hint(entry: dict) -> str:
    value = entry.get("type")
    return value if isinstance(value, str) else ""


def _sources(entry: Any) -> list[str]:
    if isinstance(entry, str):
        return [entry]
    if isinstance(entry, dict):
        source = entry.get("source")
        if isinstance(source, str):
            return [source]
        if isinstance(source, list):
            return [s for s in source if isinstance(s, str)]
        value = entry.get("type") or entry.get("value")
        return [value] if isinstance(value, str) else []
    if isinstance(entry, list):
        return [s for s in entry if isinstance(s, str)]
    return []


# -- Plain YAML steps dialect -------------------------------------------------


def _extract_generic(data: dict) -> AbstractWorkflowDescriptor:
    raw_steps = data.get("steps")
    if not isinstance(raw_steps, list):
        raise ParseFailure("expected a top-level 'steps' list", location="steps")

    parameters = []
    for entry in data.get("parameters") or []:
        if isinstance(entry, str):
            parameters.append({"id": entry, "type_hint": ""})
        elif isinstance(entry, dict):
            parameters.append(
                {"id": str(entry.get("id", "")), "type_hint": str(entry.get("type", ""))}
            )

    step_ids = set()
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict) or not raw.get("id"):
            raise ParseFailure(f"step #{i + 1} has no id", location=f"steps[{i}]")
        step_ids.add(str(raw["id"]))

    steps: list[AbstractStep] = []
    edges: list[tuple[str, str]] = []
    for raw in raw_steps:
        sid = str(raw["id"])
        inputs: list[str] = []
        for item in raw.get("inputs") or []:
            if isinstance(item, str):
                name, _, ref = item.partition("<=")
                consumer = port_id(sid, name.strip())
                inputs.append(consumer)
                ref = ref.strip()
                if ref:
                    edges.append((_normalize_ref(ref, step_ids, sid), consumer))
            elif isinstance(item, dict):
                name = str(item.get("id", ""))
                consumer = port_id(sid, name)
                inputs.append(consumer)
                ref = item.get("from")
                if isinstance(ref, str) and ref:
                    edges.append((_normalize_ref(ref, step_ids, sid), consumer))
        outputs = [port_id(sid, str(o)) for o in raw.get("outputs") or []]
        steps.append(
            AbstractStep(
                id=sid,
                tool_hint=str(raw.get("tool", "")),
                inputs=inputs,
                outputs=outputs,
            )
        )
    return AbstractWorkflowDescriptor(steps=steps, edges=edges, parameters=parameters)


def _normalize_ref(ref: str, step_ids: set[str], location: str) -> str:
    ref = ref.replace(".", "/", 1) if "/" not in ref else ref
    head = ref.split("/", 1)[0]
    if head not in step_ids:
        raise ParseFailure(f"input reference {ref!r} names no step", location=location)
    return ref


# -- Validation ----------------------------------------------------------------


def _validate_descriptor(descriptor: AbstractWorkflowDescriptor) -> None:
    seen = set()
    for step in descriptor.steps:
        if step.id in seen:
            raise ParseFailure(f"duplicate step id {step.id!r}", location=step.id)
        seen.add(step.id)

    declared = {p for s in descriptor.steps for p in (*s.inputs, *s.outputs)}
    adjacency: dict[str, set[str]] = {s.id: set() for s in descriptor.steps}
    for producer, consumer in descriptor.edges:
        if producer not in declared or consumer not in declared:
            raise ParseFailure(
                f"edge {producer} -> {consumer} references an undeclared port",
                location=producer,
            )
        producer_step = producer.split("/", 1)[0]
        consumer_step = consumer.split("/", 1)[0]
        adjacency[producer_step].add(consumer_step)

    _reject_cycles(adjacency)


def _reject_cycles(adjacency: dict[str, set[str]]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adjacency}

    def visit(node: str, trail: list[str]) -> None:
        color[node] = GRAY
        trail.append(node)
        for neighbor in sorted(adjacency[node]):
            if color[neighbor] == GRAY:
                cycle = trail[trail.index(neighbor) :] + [neighbor]
                raise CyclicWorkflow(f"workflow graph has a cycle: {' -> '.join(cycle)}")
            if color[neighbor] == WHITE:
                visit(neighbor, trail)
        trail.pop()
        color[node] = BLACK

    for node in sorted(adjacency):
        if color[node] == WHITE:
            visit(node, [])


def guess_dialect(main_file: bytes, filename: str = "") -> str | None:
    """Best-effort dialect detection for crates that do not say."""
    if filename.endswith(".cwl"):
        return "cwl"
    try:
        data = yaml.safe_load(main_file.decode("utf-8"))
    except (UnicodeDecodeError, yaml.YAMLError):
        return None
    if not isinstance(data, dict):
        return None
    if str(data.get("class", "")).lower() == "workflow":
        return "cwl"
    if isinstance(data.get("steps"), list):
        return "generic-yaml-steps"
    return None
