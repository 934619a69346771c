"""Execution provenance: run records, machine descriptions, event ingestion.

Events arrive as line-delimited JSON documents, one run spread over a
start event, any number of step events, and a terminal end event. Runs are
grouped by run_id, component references resolve to PIDs where the registry
knows them and survive as unresolved strings otherwise, and every resolved
component gains a usage back-link. Machines are first-class records so the
infrastructure itself is described, searchable, and exportable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .access import AccessPolicy, Principal
from .documents import Document, SourceDescriptor, compute_checksum, canonical_json_bytes
from .errors import InvalidDocument, Unauthorized
from .ids import PersistentIdentifier
from .store import RecordStore

logger = logging.getLogger("componenthub.provenance")

START = "start"
STEP = "step"
END = "end"

MACHINE_MARKER = "x_machine"


@dataclass
class RunRecord:
    run_id: str
    workflow_ref: str
    component_refs: list[str] = field(default_factory=list)
    unresolved_refs: list[str] = field(default_factory=list)
    machine_ref: str = ""
    started_at: str = ""
    ended_at: str = ""
    status: str = "failed"
    environment_digest: str | None = None
    metrics: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    terminal: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "workflow_ref": self.workflow_ref,
            "component_refs": self.component_refs,
            "unresolved_refs": self.unresolved_refs,
            "machine_ref": self.machine_ref,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "status": self.status,
            "environment_digest": self.environment_digest,
            "metrics": self.metrics,
            "flags": self.flags,
            "terminal": self.terminal,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RunRecord":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass
class IngestSummary:
    runs: list[RunRecord]
    malformed: int = 0
    rejected_after_terminal: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "runs": [r.to_json() for r in self.runs],
            "malformed": self.malformed,
            "rejected_after_terminal": self.rejected_after_terminal,
        }


EventAdapter = Callable[[dict[str, Any]], dict[str, Any]]


class ProvenanceLedger:
    """Ingests event streams and maintains run records plus back-links."""

    def __init__(self, store: RecordStore):
        self._store = store

    def _load_run(self, run_id: str) -> RunRecord | None:
        raw = self._store.storage.get(f"run/{run_id}")
        return RunRecord.from_json(json.loads(raw.decode("utf-8"))) if raw else None

    def _save_run(self, run: RunRecord) -> None:
        self._store.storage.put_many({f"run/{run.run_id}": canonical_json_bytes(run.to_json())})

    def get_run(self, run_id: str) -> RunRecord | None:
        return self._load_run(run_id)

    def list_runs(self) -> list[RunRecord]:
        return [
            RunRecord.from_json(json.loads(raw.decode("utf-8")))
            for _, raw in self._store.storage.scan("run/")
        ]

    def ingest(
        self,
        events: Iterable[dict[str, Any] | str | bytes],
        adapter: EventAdapter | None = None,
    ) -> IngestSummary:
        """Group a stream of event documents into run records.

        Events after a run's terminal event are rejected and counted, never
        merged. A terminal event arriving before any start flags the run as
        out-of-order but keeps the timestamps exactly as given.
        """
        summary = IngestSummary(runs=[])
        touched: dict[str, RunRecord] = {}
        for raw_event in events:
            event = _parse_event(raw_event)
            if event is None:
                summary.malformed += 1
                continue
            if adapter is not None:
                try:
                    event = adapter(event)
                except Exception:
                    summary.malformed += 1
                    continue
            run_id = str(event.get("run_id", "")).strip()
            event_type = str(event.get("type", "")).strip().lower()
            if not run_id or event_type not in (START, STEP, END):
                summary.malformed += 1
                continue

            run = touched.get(run_id) or self._load_run(run_id)
            if run is not None and run.terminal:
                summary.rejected_after_terminal += 1
                continue
            if run is None:
                run = RunRecord(run_id=run_id, workflow_ref="")
                if event_type == END:
                    run.flags.append("out-of-order-terminal")
            self._apply_event(run, event_type, event)
            touched[run_id] = run

        for run in touched.values():
            self._resolve_references(run)
            self._save_run(run)
            if run.terminal:
                self._link_components(run)
            summary.runs.append(run)
        return summary

    def _apply_event(self, run: RunRecord, event_type: str, event: dict[str, Any]) -> None:
        timestamp = str(event.get("timestamp", ""))
        workflow = event.get("workflow")
        if workflow:
            run.workflow_ref = str(workflow)
        machine = event.get("machine")
        if machine:
            run.machine_ref = str(machine)
        for ref in _component_refs(event):
            if ref not in run.component_refs:
                run.component_refs.append(ref)
        for name, value in (event.get("metrics") or {}).items():
            try:
                run.metrics[str(name)] = float(value)
            except (TypeError, ValueError):
                continue

        if event_type == START:
            run.started_at = timestamp or run.started_at
        elif event_type == END:
            run.ended_at = timestamp or run.ended_at
            run.status = "succeeded" if event.get("status") == "succeeded" else "failed"
            environment = event.get("environment")
            if environment is not None:
                run.environment_digest = compute_checksum(
                    canonical_json_bytes(environment)
                ).digest
            run.terminal = True

    def _resolve_references(self, run: RunRecord) -> None:
        run.unresolved_refs = []
        for ref in [run.workflow_ref, run.machine_ref, *run.component_refs]:
            if not ref:
                continue
            if not self._known(ref) and ref not in run.unresolved_refs:
                run.unresolved_refs.append(ref)

    def _known(self, ref: str) -> bool:
        try:
            PersistentIdentifier.parse(ref)
        except ValueError:
            return False
        return self._store.exists(ref)

    def _link_components(self, run: RunRecord) -> None:
        for ref in {run.workflow_ref, *run.component_refs}:
            if ref and self._known(ref):
                self._store.add_run_link(ref, run.run_id)

    def runs_for(self, pid: str) -> list[str]:
        usage = self._store.get_usage(pid)
        return list(usage["runs"]) if usage else []


def _parse_event(raw: dict[str, Any] | str | bytes) -> dict[str, Any] | None:
    if isinstance(raw, dict):
        return raw
    try:
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        event = json.loads(text)
    except (ValueError, UnicodeDecodeError):
        return None
    return event if isinstance(event, dict) else None


def _component_refs(event: dict[str, Any]) -> list[str]:
    refs = []
    components = event.get("components")
    if isinstance(components, list):
        refs.extend(str(c) for c in components)
    single = event.get("component")
    if single:
        refs.append(str(single))
    return refs


def iter_ndjson(text: str | bytes) -> Iterable[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if line:
            yield line


# ---------------------------------------------------------------------------
# Machines as described instruments
# ---------------------------------------------------------------------------


@dataclass
class MachineDescription:
    name: str
    architecture: str = ""
    accelerator: str = ""
    scheduler: str = ""
    commissioned: str = ""  # ISO date
    decommission_planned: str = ""
    site: str = ""

    def lifespan_years(self) -> int | None:
        if not self.commissioned or not self.decommission_planned:
            return None
        return int(self.decommission_planned[:4]) - int(self.commissioned[:4])


def machine_document(desc: MachineDescription) -> Document:
    """Render a machine description as a registerable service record."""
    if desc.commissioned and desc.decommission_planned:
        if desc.decommission_planned < desc.commissioned:
            raise InvalidDocument("decommission_planned must not precede commissioned")
    parts = [p for p in (desc.architecture, desc.accelerator, desc.scheduler) if p]
    summary = ", ".join(parts) if parts else "unspecified configuration"
    doc: Document = {
        "name": desc.name,
        "description": f"HPC machine instrument at {desc.site or 'unknown site'}: {summary}.",
        "kind": "service",
        "license": "proprietary",
        "authors": [{"name": desc.site or "facility operations"}],
        "keywords": ["machine", "instrument"],
        MACHINE_MARKER: True,
        "x_architecture": desc.architecture,
        "x_accelerator": desc.accelerator,
        "x_scheduler": desc.scheduler,
        "x_site": desc.site,
    }
    if desc.commissioned:
        doc["x_commissioned"] = desc.commissioned
    if desc.decommission_planned:
        doc["x_decommission_planned"] = desc.decommission_planned
    lifespan = desc.lifespan_years()
    if lifespan is not None:
        doc["x_lifespan_years"] = lifespan
    return doc


def register_machine(
    store: RecordStore,
    desc: MachineDescription,
    policy: AccessPolicy,
    principal: Principal,
) -> str:
    """Store a machine as a first-class service record; curator-only."""
    if not principal.has_role("curator"):
        raise Unauthorized("registering machines requires the curator role",
                           reason="role-insufficient")
    doc = machine_document(desc)
    source = SourceDescriptor(scheme="https", locator=f"https://machines.invalid/{desc.name}")
    record = store.register(doc, [source], policy, principal)
    return record.pid.rendered


def is_machine_record(document: Document) -> bool:
    return bool(document.get(MACHINE_MARKER))
