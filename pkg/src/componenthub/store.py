"""Durable, versioned record storage and faceted search.

Records are stored as a head document under ``record/<pid>`` plus immutable
version snapshots under ``version/<pid>/<n>``. Every snapshot carries a
digest over its canonical bytes so history tampering is detectable. A small
in-memory index (facet postings plus per-field token sets) is rebuilt from
storage at open and maintained on every write; relevance is a deterministic
field-weighted token match (name=3, keywords=2, description=1) with ties
broken by PID.
"""

from __future__ import annotations

import hashlib
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Iterator

from .access import (
    REGISTER,
    TOMBSTONE,
    UPDATE,
    AccessPolicy,
    Principal,
    authorize,
    visibility_level,
)
from .clock import Clock, from_iso, to_iso
from .documents import (
    Document,
    SourceDescriptor,
    canonical_json_bytes,
    validate_document,
)
from .errors import (
    AlreadyTombstoned,
    InvalidDocument,
    MalformedQuery,
    NotFound,
    Tombstoned,
    Unauthorized,
)
from .ids import ComponentKind, PersistentIdentifier, PidMinter
from .storage import StoragePort

ACTIVE = "active"
STALE = "stale"
TOMBSTONED = "tombstoned"

FACET_NAMES = ("kind", "license", "keyword", "target_machine", "status", "namespace")

# Facets a listed-mode stub may match without leaking restricted metadata.
STUB_FACETS = ("kind", "namespace", "status")

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class TombstoneNote:
    pid: str
    reason: str
    removed_at: datetime
    final_version: int

    def to_json(self) -> dict[str, Any]:
        return {
            "pid": self.pid,
            "reason": self.reason,
            "removed_at": to_iso(self.removed_at),
            "final_version": self.final_version,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "TombstoneNote":
        return cls(
            pid=data["pid"],
            reason=data["reason"],
            removed_at=from_iso(data["removed_at"]),
            final_version=data["final_version"],
        )


@dataclass
class ComponentRecord:
    pid: PersistentIdentifier
    kind: ComponentKind
    document: Document
    sources: list[SourceDescriptor]
    policy: AccessPolicy
    version: int
    created_at: datetime
    updated_at: datetime
    status: str = ACTIVE
    verification: dict[str, Any] | None = None
    fairness: dict[str, Any] | None = None
    tombstone: TombstoneNote | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "pid": self.pid.rendered,
            "kind": self.kind.value,
            "document": self.document,
            "sources": [s.to_json() for s in self.sources],
            "policy": self.policy.to_json(),
            "version": self.version,
            "created_at": to_iso(self.created_at),
            "updated_at": to_iso(self.updated_at),
            "status": self.status,
            "verification": self.verification,
            "fairness": self.fairness,
            "tombstone": self.tombstone.to_json() if self.tombstone else None,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ComponentRecord":
        tombstone = data.get("tombstone")
        return cls(
            pid=PersistentIdentifier.parse(data["pid"]),
            kind=ComponentKind(data["kind"]),
            document=data["document"],
            sources=[SourceDescriptor.from_json(s) for s in data["sources"]],
            policy=AccessPolicy.from_json(data["policy"]),
            version=data["version"],
            created_at=from_iso(data["created_at"]),
            updated_at=from_iso(data["updated_at"]),
            status=data["status"],
            verification=data.get("verification"),
            fairness=data.get("fairness"),
            tombstone=TombstoneNote.from_json(tombstone) if tombstone else None,
        )


@dataclass
class SearchQuery:
    text: str | None = None
    facets: dict[str, str] = field(default_factory=dict)
    offset: int = 0
    limit: int = 20
    include_tombstoned: bool = False


@dataclass
class SearchPage:
    total: int
    items: list[dict[str, Any]]
    next_offset: int | None

    def to_json(self) -> dict[str, Any]:
        return {"total": self.total, "items": self.items, "next_offset": self.next_offset}


def snapshot_digest(snapshot: dict[str, Any]) -> str:
    content = {k: v for k, v in snapshot.items() if k != "digest"}
    return hashlib.sha256(canonical_json_bytes(content)).hexdigest()


def apply_visibility(
    record: ComponentRecord, principal: Principal, now: datetime
) -> dict[str, Any] | None:
    """Redact a record for a principal: full view, existence stub, or nothing."""
    level = visibility_level(record.policy, principal, now)
    if level == "none":
        return None
    if level == "stub":
        return {
            "pid": record.pid.rendered,
            "name": record.document.get("name", ""),
            "kind": record.kind.value,
            "organization": record.policy.enclave,
            "exists": True,
            "access": "restricted",
        }
    view = record.to_json()
    view["access"] = "full"
    return view


class RecordStore:
    """Owner of record state. Writes are serialized per PID; reads see
    committed heads only."""

    def __init__(self, storage: StoragePort, clock: Clock, namespace: str):
        self._storage = storage
        self._clock = clock
        self.namespace = namespace
        self.minter = PidMinter(storage, namespace)
        self._pid_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._index = _SearchIndex()
        self._rebuild_index()

    # -- internals ----------------------------------------------------------

    def _lock_for(self, pid: str) -> threading.Lock:
        with self._locks_guard:
            return self._pid_locks.setdefault(pid, threading.Lock())

    def _rebuild_index(self) -> None:
        for _, raw in self._storage.scan("record/"):
            record = ComponentRecord.from_json(_loads(raw))
            self._index.put(record)

    def _load(self, pid: str) -> ComponentRecord | None:
        raw = self._storage.get(f"record/{pid}")
        if raw is None:
            return None
        return ComponentRecord.from_json(_loads(raw))

    def _require(self, pid: str) -> ComponentRecord:
        record = self._load(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        return record

    def _persist(self, record: ComponentRecord, snapshot: dict[str, Any] | None) -> None:
        items: dict[str, bytes | None] = {
            f"record/{record.pid.rendered}": canonical_json_bytes(record.to_json())
        }
        if snapshot is not None:
            items[f"version/{record.pid.rendered}/{snapshot['version']:08d}"] = (
                canonical_json_bytes(snapshot)
            )
        self._storage.put_many(items)
        self._index.put(record)

    def _make_snapshot(self, record: ComponentRecord) -> dict[str, Any]:
        snapshot = {
            "version": record.version,
            "timestamp": to_iso(record.updated_at),
            "document": record.document,
            "sources": [s.to_json() for s in record.sources],
            "policy": record.policy.to_json(),
        }
        snapshot["digest"] = snapshot_digest(snapshot)
        return snapshot

    # -- operations ---------------------------------------------------------

    def register(
        self,
        document: Document,
        sources: list[SourceDescriptor],
        policy: AccessPolicy,
        principal: Principal,
        *,
        pid: PersistentIdentifier | None = None,
    ) -> ComponentRecord:
        """Persist a new record at version 1 with a freshly minted PID.

        The record is findable through search as soon as this returns. A
        caller-supplied PID is only legal for federation mirrors in a
        foreign namespace.
        """
        report = validate_document(document)
        if not report.valid:
            raise InvalidDocument("document fails validation", report=report)
        decision = authorize(principal, REGISTER, policy, self._clock.now())
        if not decision:
            raise Unauthorized(f"register denied: {decision.reason}", reason=decision.reason)
        if not sources:
            raise InvalidDocument("at least one source is required")
        kind = ComponentKind.parse(str(document["kind"]))
        if pid is None:
            pid = self.minter.mint(self.namespace, kind)
        now = self._clock.now()
        record = ComponentRecord(
            pid=pid,
            kind=kind,
            document=document,
            sources=list(sources),
            policy=policy,
            version=1,
            created_at=now,
            updated_at=now,
        )
        with self._lock_for(pid.rendered):
            self._persist(record, self._make_snapshot(record))
        return record

    def update(
        self,
        pid: str,
        principal: Principal,
        document_patch: Document | None = None,
        sources: list[SourceDescriptor] | None = None,
    ) -> ComponentRecord:
        """Apply a partial document patch and/or replace sources as a new version.

        A patch value of ``None`` removes the property. Kind and PID are
        immutable regardless of patch content.
        """
        with self._lock_for(pid):
            record = self._require(pid)
            if record.status == TOMBSTONED:
                raise Tombstoned(f"{pid} is tombstoned")
            decision = authorize(principal, UPDATE, record.policy, self._clock.now())
            if not decision:
                raise Unauthorized(f"update denied: {decision.reason}", reason=decision.reason)
            document = dict(record.document)
            if document_patch:
                for prop, value in document_patch.items():
                    if value is None:
                        document.pop(prop, None)
                    else:
                        document[prop] = value
                if ComponentKind.parse(str(document.get("kind", ""))) != record.kind:
                    raise InvalidDocument("component kind is immutable after registration")
            report = validate_document(document, subject=pid)
            if not report.valid:
                raise InvalidDocument("patched document fails validation", report=report)
            record.document = document
            if sources is not None:
                if not sources:
                    raise InvalidDocument("sources may not be emptied while active")
                record.sources = list(sources)
            record.version += 1
            record.updated_at = self._clock.now()
            self._persist(record, self._make_snapshot(record))
            return record

    def set_policy(self, pid: str, policy: AccessPolicy, principal: Principal) -> ComponentRecord:
        """Replace the access policy; policy changes version the record."""
        with self._lock_for(pid):
            record = self._require(pid)
            if record.status == TOMBSTONED:
                raise Tombstoned(f"{pid} is tombstoned")
            record.policy = policy
            record.version += 1
            record.updated_at = self._clock.now()
            self._persist(record, self._make_snapshot(record))
            return record

    def tombstone(self, pid: str, reason: str, principal: Principal) -> TombstoneNote:
        """Mark the artifact gone while keeping all metadata resolvable."""
        with self._lock_for(pid):
            record = self._require(pid)
            if record.status == TOMBSTONED:
                raise AlreadyTombstoned(f"{pid} is already tombstoned")
            decision = authorize(principal, TOMBSTONE, record.policy, self._clock.now())
            if not decision:
                raise Unauthorized(f"tombstone denied: {decision.reason}", reason=decision.reason)
            note = TombstoneNote(
                pid=pid,
                reason=reason,
                removed_at=self._clock.now(),
                final_version=record.version,
            )
            record.status = TOMBSTONED
            record.tombstone = note
            record.updated_at = note.removed_at
            self._persist(record, None)
            return note

    def resolve(self, pid: str, principal: Principal) -> dict[str, Any]:
        """Visibility-filtered view of the latest version; never mutates.

        Hidden records are indistinguishable from never-minted PIDs.
        Tombstoned records resolve fine and carry their TombstoneNote.
        """
        record = self._load(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        view = apply_visibility(record, principal, self._clock.now())
        if view is None:
            raise NotFound(f"no record for {pid}")
        if view.get("access") == "full":
            usage = self.get_usage(pid)
            if usage:
                view["usage"] = usage
        return view

    def list_versions(self, pid: str, principal: Principal) -> list[dict[str, Any]]:
        record = self._require(pid)
        level = visibility_level(record.policy, principal, self._clock.now())
        if level == "none":
            raise NotFound(f"no record for {pid}")
        if level != "full":
            raise Unauthorized("version history requires full visibility", reason="not-visible")
        return [snap for _, snap in self.iter_version_snapshots(pid)]

    def iter_version_snapshots(self, pid: str) -> Iterator[tuple[str, dict[str, Any]]]:
        for key, raw in self._storage.scan(f"version/{pid}/"):
            yield key, _loads(raw)

    def search(self, query: SearchQuery, principal: Principal) -> SearchPage:
        """Deterministic faceted search over records visible to the principal.

        Listed-mode stubs match only on existence-safe criteria (name text,
        kind/namespace/status facets); restricted metadata never influences
        an outsider's result set.
        """
        _check_query(query)
        now = self._clock.now()
        text_tokens = tokenize(query.text) if query.text else []
        matches: list[tuple[int, str, ComponentRecord]] = []
        for pid in self._index.candidates(query.facets):
            record = self._load(pid)
            if record is None:
                continue
            if record.status == TOMBSTONED and not query.include_tombstoned:
                continue
            level = visibility_level(record.policy, principal, now)
            if level == "none":
                continue
            if not _facets_match(record, query.facets, level):
                continue
            score = 0
            if text_tokens:
                score = self._index.score(pid, text_tokens, level)
                if score == 0:
                    continue
            matches.append((score, pid, record))
        matches.sort(key=lambda m: (-m[0], m[1]))
        window = matches[query.offset : query.offset + query.limit]
        items = [apply_visibility(record, principal, now) for _, _, record in window]
        next_offset = (
            query.offset + query.limit if query.offset + query.limit < len(matches) else None
        )
        return SearchPage(total=len(matches), items=items, next_offset=next_offset)

    # -- watcher / provenance / assessment hooks ----------------------------

    def set_status(self, pid: str, status: str) -> None:
        if status not in (ACTIVE, STALE):
            raise ValueError(f"cannot force status {status!r}")
        with self._lock_for(pid):
            record = self._require(pid)
            if record.status == TOMBSTONED:
                raise Tombstoned(f"{pid} is tombstoned")
            if record.status != status:
                record.status = status
                self._persist(record, None)

    def set_verification(self, pid: str, verification: dict[str, Any]) -> None:
        with self._lock_for(pid):
            record = self._require(pid)
            record.verification = verification
            self._persist(record, None)

    def set_fairness(self, pid: str, report: dict[str, Any]) -> None:
        with self._lock_for(pid):
            record = self._require(pid)
            record.fairness = report
            self._persist(record, None)

    def add_run_link(self, pid: str, run_id: str) -> None:
        """Provenance back-link: bump usage count and remember the latest run."""
        with self._lock_for(pid):
            raw = self._storage.get(f"usage/{pid}")
            usage = _loads(raw) if raw else {"run_count": 0, "latest_run_id": None, "runs": []}
            if run_id not in usage["runs"]:
                usage["runs"].append(run_id)
                usage["run_count"] += 1
            usage["latest_run_id"] = run_id
            self._storage.put_many({f"usage/{pid}": canonical_json_bytes(usage)})

    def get_usage(self, pid: str) -> dict[str, Any] | None:
        raw = self._storage.get(f"usage/{pid}")
        return _loads(raw) if raw else None

    # -- plumbing for other modules -----------------------------------------

    def get_record(self, pid: str) -> ComponentRecord | None:
        """Unredacted record; internal use by trusted modules only."""
        return self._load(pid)

    def exists(self, pid: str) -> bool:
        return self._storage.get(f"record/{pid}") is not None

    def all_pids(self) -> list[str]:
        return [key.split("/", 1)[1] for key, _ in self._storage.scan("record/")]

    def mirror_upsert(
        self,
        record: ComponentRecord,
    ) -> None:
        """Write a federation mirror under its remote identity, verbatim."""
        if record.pid.namespace == self.namespace:
            raise ValueError("mirror_upsert is for foreign-namespace records only")
        with self._lock_for(record.pid.rendered):
            self._persist(record, self._make_snapshot(record))

    @property
    def clock(self) -> Clock:
        return self._clock

    @property
    def storage(self) -> StoragePort:
        return self._storage


def _check_query(query: SearchQuery) -> None:
    if query.offset < 0:
        raise MalformedQuery("offset must be >= 0")
    if not 1 <= query.limit <= 100:
        raise MalformedQuery("limit must be in [1, 100]")
    unknown = set(query.facets) - set(FACET_NAMES)
    if unknown:
        raise MalformedQuery(f"unknown facets: {sorted(unknown)}")


def _facets_match(record: ComponentRecord, facets: dict[str, str], level: str) -> bool:
    for facet, value in facets.items():
        if level == "stub" and facet not in STUB_FACETS:
            return False
        if facet == "kind":
            if ComponentKind.parse(value) != record.kind:
                return False
        elif facet == "status":
            if record.status != value:
                return False
        elif facet == "namespace":
            if record.pid.namespace != value:
                return False
        elif facet == "license":
            if record.document.get("license") != value:
                return False
        elif facet == "keyword":
            keywords = [k.lower() for k in record.document.get("keywords", [])]
            if value.lower() not in keywords:
                return False
        elif facet == "target_machine":
            if value not in (record.document.get("target_machine") or []):
                return False
    return True


class _SearchIndex:
    """Per-record token sets for scoring plus a candidate accelerator."""

    WEIGHTS = {"name": 3, "keyword": 2, "description": 1}

    def __init__(self):
        self._fields: dict[str, dict[str, frozenset[str]]] = {}
        self._lock = threading.Lock()

    def put(self, record: ComponentRecord) -> None:
        doc = record.document
        fields = {
            "name": frozenset(tokenize(str(doc.get("name", "")))),
            "keyword": frozenset(
                t for k in doc.get("keywords", []) or [] for t in tokenize(str(k))
            ),
            "description": frozenset(tokenize(str(doc.get("description", "")))),
        }
        with self._lock:
            self._fields[record.pid.rendered] = fields

    def candidates(self, facets: dict[str, str]) -> list[str]:
        # Facet postings would only help beyond desk scale; a full scan keeps
        # index and store trivially consistent.
        with self._lock:
            return sorted(self._fields)

    def score(self, pid: str, tokens: list[str], level: str) -> int:
        with self._lock:
            fields = self._fields.get(pid)
        if fields is None:
            return 0
        score = 0
        for token in tokens:
            if token in fields["name"]:
                score += self.WEIGHTS["name"]
            if level == "full":
                if token in fields["keyword"]:
                    score += self.WEIGHTS["keyword"]
                if token in fields["description"]:
                    score += self.WEIGHTS["description"]
        return score


def _loads(raw: bytes) -> Any:
    import json

    return json.loads(raw.decode("utf-8"))
