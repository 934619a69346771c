"""TRS-style listing surface and the pull-based sync engine.

The registry inter-registers with sister hubs by exposing a minimal tools
listing (id, name, version checksums) and pulling the same listing from
remotes. Records mirror under their original identity; the namespace that
prefixes a PID stays authoritative for its content. A divergent local edit
of a foreign record is never silently lost: the remote version wins and the
local edit forks into a fresh local record linked by ``derived_from``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Protocol

from .access import ANONYMOUS, AccessPolicy, Principal, visibility_level
from .clock import Clock, from_iso, to_iso
from .documents import SourceDescriptor, canonical_json_bytes, canonicalize_document
from .errors import (
    MalformedQuery,
    NotFound,
    RemoteUnreachable,
    Unauthorized,
    VersionNotFound,
)
from .ids import ComponentKind, PersistentIdentifier
from .store import ComponentRecord, RecordStore, TOMBSTONED

logger = logging.getLogger("componenthub.federation")

TRS_PREFIX = "/ga4gh/trs/v2"

FEDERATION_ENCLAVE = "federation"
FEDERATION_SUBJECT = "system:federation"

FEDERATION_PRINCIPAL = Principal(
    subject=FEDERATION_SUBJECT,
    display_name="Federation sync worker",
    enclaves=frozenset({FEDERATION_ENCLAVE}),
    roles=frozenset({"curator"}),
)


@dataclass
class RemoteRegistry:
    name: str
    base_url: str
    namespace: str
    trust: str = "read-only"  # read-only | bidirectional
    last_sync_cursor: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "base_url": self.base_url,
            "namespace": self.namespace,
            "trust": self.trust,
            "last_sync_cursor": self.last_sync_cursor,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RemoteRegistry":
        return cls(
            name=data["name"],
            base_url=data.get("base_url", ""),
            namespace=data["namespace"],
            trust=data.get("trust", "read-only"),
            last_sync_cursor=data.get("last_sync_cursor", ""),
        )


@dataclass
class SyncReport:
    remote: str
    pulled: int = 0
    created: int = 0
    updated: int = 0
    conflicts: list[dict[str, str]] = field(default_factory=list)
    new_cursor: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "remote": self.remote,
            "pulled": self.pulled,
            "created": self.created,
            "updated": self.updated,
            "conflicts": self.conflicts,
            "new_cursor": self.new_cursor,
        }


class RemoteTransport(Protocol):
    """How the sync engine reads a sister registry."""

    def list_tools(self) -> list[dict[str, Any]]: ...

    def get_record(self, pid: str) -> dict[str, Any] | None:
        """Public record view, or None when invisible/absent."""


def document_digest(document: dict[str, Any]) -> str:
    return hashlib.sha256(canonicalize_document(document)).hexdigest()


class Federation:
    def __init__(self, store: RecordStore, clock: Clock):
        self._store = store
        self._clock = clock
        self._sync_locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    # -- TRS listing surface -------------------------------------------------

    def trs_list_tools(
        self,
        *,
        offset: int = 0,
        limit: int = 100,
        tool_class: str | None = None,
        principal: Principal = ANONYMOUS,
    ) -> dict[str, Any]:
        """Stable id-ordered listing of records visible to the caller.

        Enclave records surface per their policy mode: hidden ones are
        absent, listed ones appear as existence stubs without checksums.
        """
        if offset < 0 or limit < 1:
            raise MalformedQuery("offset must be >= 0 and limit >= 1")
        now = self._clock.now()
        listings = []
        for pid in sorted(self._store.all_pids()):
            record = self._store.get_record(pid)
            if record is None:
                continue
            if tool_class is not None and record.kind != ComponentKind.parse(tool_class):
                continue
            level = visibility_level(record.policy, principal, now)
            if level == "none":
                continue
            listings.append(self._listing(record, stub=(level == "stub")))
        page = listings[offset : offset + limit]
        return {"tools": page, "total": len(listings), "offset": offset, "limit": limit}

    def _listing(self, record: ComponentRecord, *, stub: bool) -> dict[str, Any]:
        pid = record.pid.rendered
        if stub:
            versions: list[dict[str, Any]] = [
                {
                    "version_id": str(record.version),
                    "descriptor_type": "abstract",
                    "checksum": None,
                }
            ]
            listing = {
                "id": pid,
                "toolname": record.document.get("name", ""),
                "description": "",
                "organization": record.pid.namespace,
                "versions": versions,
                "x-access": "restricted",
            }
        else:
            versions = []
            for _, snapshot in self._store.iter_version_snapshots(pid):
                versions.append(
                    {
                        "version_id": str(snapshot["version"]),
                        "descriptor_type": "abstract",
                        "checksum": document_digest(snapshot["document"]),
                    }
                )
            listing = {
                "id": pid,
                "toolname": record.document.get("name", ""),
                "description": record.document.get("description", ""),
                "organization": record.pid.namespace,
                "versions": versions,
            }
            badge = (record.fairness or {}).get("badge")
            if badge:
                listing["x-fair-badge"] = badge
        listing["x-updated-at"] = to_iso(record.updated_at)
        if record.status == TOMBSTONED:
            listing["x-tombstoned"] = True
        return listing

    def trs_get_tool_version(
        self,
        tool_id: str,
        version_id: str,
        *,
        principal: Principal = ANONYMOUS,
    ) -> dict[str, Any]:
        """Version-pinned abstract descriptor plus the crate download path."""
        record = self._store.get_record(tool_id)
        if record is None:
            raise NotFound(f"no tool {tool_id}")
        level = visibility_level(record.policy, principal, self._clock.now())
        if level == "none":
            raise NotFound(f"no tool {tool_id}")
        if level == "stub":
            raise Unauthorized("descriptor requires full visibility", reason="not-visible")
        if record.status == TOMBSTONED:
            return {
                "id": tool_id,
                "version_id": version_id,
                "tombstoned": True,
                "tombstone": record.tombstone.to_json() if record.tombstone else None,
                "descriptor": None,
            }
        try:
            version = int(version_id)
        except ValueError:
            raise VersionNotFound(f"bad version id {version_id!r}") from None
        if not 1 <= version <= record.version:
            raise VersionNotFound(f"{tool_id} has no version {version_id}")
        raw = self._store.storage.get(f"descriptor/{tool_id}/{version:08d}")
        descriptor = json.loads(raw.decode("utf-8")) if raw else None
        return {
            "id": tool_id,
            "version_id": str(version),
            "descriptor": descriptor,
            "crate_url": f"/api/v1/records/{tool_id}/crate",
        }

    # -- sync engine -----------------------------------------------------------

    def _sync_lock(self, remote_name: str) -> threading.Lock:
        with self._guard:
            return self._sync_locks.setdefault(remote_name, threading.Lock())

    def _load_state(self, remote_name: str) -> dict[str, Any]:
        raw = self._store.storage.get(f"syncstate/{remote_name}")
        if raw is None:
            return {"cursor": "", "mirrored": {}}
        return json.loads(raw.decode("utf-8"))

    def _save_state(self, remote_name: str, state: dict[str, Any]) -> None:
        self._store.storage.put_many(
            {f"syncstate/{remote_name}": canonical_json_bytes(state)}
        )

    def sync_pull(self, remote: RemoteRegistry, transport: RemoteTransport) -> SyncReport:
        """Incremental pull of the remote's public records.

        The cursor (the remote's max updated-at/id pair) advances only past
        durably committed items, so a crash resumes without loss and an
        immediate re-run is a no-op.
        """
        if remote.namespace == self._store.namespace:
            raise ValueError("remote namespace must differ from the local namespace")
        lock = self._sync_lock(remote.name)
        with lock:
            return self._sync_pull_locked(remote, transport)

    def _sync_pull_locked(self, remote: RemoteRegistry, transport: RemoteTransport) -> SyncReport:
        try:
            listings = transport.list_tools()
        except Exception as exc:
            raise RemoteUnreachable(f"cannot list tools on {remote.name}: {exc}") from exc

        state = self._load_state(remote.name)
        cursor = state.get("cursor", "")
        mirrored: dict[str, str] = state.get("mirrored", {})
        report = SyncReport(remote=remote.name, new_cursor=cursor)

        items = sorted(listings, key=lambda t: (t.get("x-updated-at", ""), t["id"]))
        for item in items:
            key = _cursor_key(item)
            if cursor and key <= cursor:
                continue
            if item.get("x-tombstoned"):
                state["cursor"] = key
                report.new_cursor = key
                self._save_state(remote.name, state)
                continue
            pid = item["id"]
            report.pulled += 1
            try:
                view = transport.get_record(pid)
            except Exception as exc:
                # cursor stays put for this item; next pull retries it
                logger.warning("sync %s: fetch of %s failed: %s", remote.name, pid, exc)
                from .errors import PartialFailure

                raise PartialFailure(
                    f"sync interrupted at {pid}", report=report
                ) from exc
            self._apply_remote(pid, view, mirrored, report)
            state["cursor"] = key
            state["mirrored"] = mirrored
            report.new_cursor = key
            self._save_state(remote.name, state)

        self._append_log(remote.name, report)
        return report

    def _apply_remote(
        self,
        pid: str,
        view: dict[str, Any] | None,
        mirrored: dict[str, str],
        report: SyncReport,
    ) -> None:
        if view is None or view.get("access") != "full" or "document" not in view:
            return  # stubs and hidden records never sync content
        remote_document = view["document"]
        remote_digest = document_digest(remote_document)
        identifier = PersistentIdentifier.parse(pid)

        if identifier.namespace == self._store.namespace:
            # our own record echoed back: local origin is authoritative
            local = self._store.get_record(pid)
            if local is not None and document_digest(local.document) != remote_digest:
                report.conflicts.append({"pid": pid, "resolution": "local-kept"})
            return

        local = self._store.get_record(pid)
        if local is None:
            self._write_mirror(identifier, view)
            mirrored[pid] = remote_digest
            report.created += 1
            return

        local_digest = document_digest(local.document)
        if local_digest == remote_digest:
            mirrored[pid] = remote_digest
            return
        if mirrored.get(pid) == local_digest:
            # clean fast-forward of an untouched mirror
            self._write_mirror(identifier, view)
            mirrored[pid] = remote_digest
            report.updated += 1
            return

        # divergent local edit of a foreign record: origin wins, edit forks
        fork_pid = self._fork_local_edit(pid, local)
        self._write_mirror(identifier, view)
        mirrored[pid] = remote_digest
        report.updated += 1
        report.conflicts.append(
            {"pid": pid, "resolution": "forked", "fork_pid": fork_pid}
        )

    def _write_mirror(self, identifier: PersistentIdentifier, view: dict[str, Any]) -> None:
        policy = AccessPolicy(
            enclave=FEDERATION_ENCLAVE,
            visibility="public",
            owners=frozenset({FEDERATION_SUBJECT}),
            write_roles="curator",
        )
        record = ComponentRecord(
            pid=identifier,
            kind=ComponentKind(view["kind"]),
            document=view["document"],
            sources=[SourceDescriptor.from_json(s) for s in view.get("sources", [])],
            policy=policy,
            version=view.get("version", 1),
            created_at=from_iso(view["created_at"]),
            updated_at=from_iso(view["updated_at"]),
            status=view.get("status", "active"),
        )
        self._store.mirror_upsert(record)

    def _fork_local_edit(self, original_pid: str, local: ComponentRecord) -> str:
        document = dict(local.document)
        derived = list(document.get("derived_from") or [])
        if original_pid not in derived:
            derived.append(original_pid)
        document["derived_from"] = derived
        fork = self._store.register(
            document,
            local.sources,
            AccessPolicy(
                enclave=FEDERATION_ENCLAVE,
                visibility="public",
                owners=frozenset({FEDERATION_SUBJECT}),
            ),
            FEDERATION_PRINCIPAL,
        )
        logger.info("forked divergent edit of %s as %s", original_pid, fork.pid.rendered)
        return fork.pid.rendered

    def _append_log(self, remote_name: str, report: SyncReport) -> None:
        seq = sum(1 for _ in self._store.storage.scan(f"synclog/{remote_name}/"))
        self._store.storage.put_many(
            {
                f"synclog/{remote_name}/{seq:08d}": canonical_json_bytes(report.to_json()),
            }
        )

    def sync_log(self, remote_name: str) -> list[dict[str, Any]]:
        return [
            json.loads(raw.decode("utf-8"))
            for _, raw in self._store.storage.scan(f"synclog/{remote_name}/")
        ]


def _cursor_key(item: dict[str, Any]) -> str:
    return f"{item.get('x-updated-at', '')}|{item['id']}"


class InProcessTransport:
    """Reads another registry instance living in the same process (tests,
    and the convergence harness)."""

    def __init__(self, federation: Federation, store: RecordStore):
        self._federation = federation
        self._store = store

    def list_tools(self) -> list[dict[str, Any]]:
        tools: list[dict[str, Any]] = []
        offset = 0
        while True:
            page = self._federation.trs_list_tools(offset=offset, limit=100)
            tools.extend(page["tools"])
            offset += 100
            if offset >= page["total"]:
                return tools

    def get_record(self, pid: str) -> dict[str, Any] | None:
        record = self._store.get_record(pid)
        if record is None:
            return None
        from .store import apply_visibility

        return apply_visibility(record, ANONYMOUS, self._store.clock.now())


class HttpTransport:
    """Reads a remote registry over its gateway endpoints."""

    def __init__(self, base_url: str, client=None):
        import httpx

        self._base = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30)

    def list_tools(self) -> list[dict[str, Any]]:
        tools: list[dict[str, Any]] = []
        offset = 0
        while True:
            response = self._client.get(
                f"{self._base}{TRS_PREFIX}/tools", params={"offset": offset, "limit": 100}
            )
            response.raise_for_status()
            page = response.json()
            tools.extend(page["tools"])
            offset += 100
            if offset >= page["total"]:
                return tools

    def get_record(self, pid: str) -> dict[str, Any] | None:
        response = self._client.get(f"{self._base}/api/v1/records/{pid}")
        if response.status_code in (404, 403, 401, 410):
            return None
        response.raise_for_status()
        return response.json()
