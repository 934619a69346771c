"""The registry service facade: every capability behind one object.

Binds the record store, access control, crate interchange, federation,
watchers, provenance and FAIR assessment against one storage port, one
clock and one token verifier. The gateway and the CLI both talk to this
object, which keeps their behavior byte-identical.
"""

from __future__ import annotations

import json
import logging
from datetime import datetime
from typing import Any, Iterable

from .access import (
    AccessPolicy,
    Principal,
    TokenVerifier,
    authorize,
    may_set_embargo,
    visibility_level,
)
from .clock import Clock, FixedClock, RealClock, from_iso, to_iso
from .config import ServiceConfig
from .crates import (
    WorkflowCrate,
    crate_from_record,
    document_from_crate,
    read_crate_zip,
    validate_crate,
    write_crate_zip,
)
from .documents import (
    Document,
    SourceDescriptor,
    canonical_json_bytes,
    compute_checksum,
    validate_document,
)
from .errors import (
    InvalidCrate,
    NotFound,
    PastTimestamp,
    SourceUnreachable,
    Tombstoned,
    Unauthorized,
)
from .fairness import FairnessReport, evaluate_checks
from .federation import (
    Federation,
    HttpTransport,
    RemoteRegistry,
    RemoteTransport,
    SyncReport,
)
from .ids import ComponentKind, is_valid_pid
from .provenance import (
    IngestSummary,
    MachineDescription,
    ProvenanceLedger,
    is_machine_record,
    iter_ndjson,
    register_machine,
)
from .store import (
    ComponentRecord,
    RecordStore,
    SearchPage,
    SearchQuery,
    TOMBSTONED,
    TombstoneNote,
    apply_visibility,
)
from .storage import StoragePort, open_storage
from .watchers import (
    ArtifactFetcher,
    CommandRunner,
    LocalFetcher,
    SubprocessRunner,
    WatchScheduler,
    Watcher,
    run_viability_check,
)
from .workflows import extract_abstract_workflow, guess_dialect

logger = logging.getLogger("componenthub.service")


class RegistryService:
    def __init__(
        self,
        config: ServiceConfig,
        *,
        storage: StoragePort | None = None,
        clock: Clock | None = None,
        fetcher: ArtifactFetcher | None = None,
        runner: CommandRunner | None = None,
    ):
        config.validate()
        self.config = config
        self.storage = storage if storage is not None else open_storage(config.storage_path)
        if clock is not None:
            self.clock = clock
        elif config.clock_start:
            self.clock = FixedClock(config.clock_start)
        else:
            self.clock = RealClock()
        self.store = RecordStore(self.storage, self.clock, config.namespace)
        self.verifier = TokenVerifier(secret=config.token_secret.encode("utf-8"), clock=self.clock)
        self.fetcher = fetcher if fetcher is not None else LocalFetcher(storage=self.storage)
        self.runner = runner if runner is not None else SubprocessRunner()
        self.watcher = Watcher(self.store, self.fetcher, self.clock)
        self.scheduler = WatchScheduler(self.watcher)
        self.ledger = ProvenanceLedger(self.store)
        self.federation = Federation(self.store, self.clock)
        import threading

        self._sandbox_slots = threading.Semaphore(max(1, config.sandbox_workers))

    # -- identity -------------------------------------------------------------

    def authenticate(self, token: str | None) -> Principal:
        return self.verifier.authenticate(token)

    def issue_token(self, principal: Principal, expires_at: datetime) -> str:
        return self.verifier.issue(principal, expires_at)

    # -- records ----------------------------------------------------------------

    def register(
        self,
        document: Document,
        sources: list[SourceDescriptor],
        policy: AccessPolicy,
        principal: Principal,
    ) -> ComponentRecord:
        if self.config.eager_verification and sources:
            reachable = 0
            for source in sources:
                try:
                    self.fetcher.fetch(source)
                    reachable += 1
                except Exception:
                    continue
            if reachable == 0:
                raise SourceUnreachable("eager verification failed for every source")
        record = self.store.register(document, sources, policy, principal)
        self._store_descriptor_if_workflow(record)
        return record

    def update(
        self,
        pid: str,
        principal: Principal,
        document_patch: Document | None = None,
        sources: list[SourceDescriptor] | None = None,
    ) -> ComponentRecord:
        record = self.store.update(pid, principal, document_patch, sources)
        self._store_descriptor_if_workflow(record)
        return record

    def tombstone(self, pid: str, reason: str, principal: Principal) -> TombstoneNote:
        return self.store.tombstone(pid, reason, principal)

    def resolve(self, pid: str, principal: Principal) -> dict[str, Any]:
        return self.store.resolve(pid, principal)

    def search(self, query: SearchQuery, principal: Principal) -> SearchPage:
        return self.store.search(query, principal)

    def list_versions(self, pid: str, principal: Principal) -> list[dict[str, Any]]:
        return self.store.list_versions(pid, principal)

    def set_embargo(self, pid: str, until: datetime, principal: Principal) -> AccessPolicy:
        """Narrow visibility until a future instant; release needs no write."""
        record = self.store.get_record(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        decision = may_set_embargo(principal, record.policy)
        if not decision:
            raise Unauthorized(f"embargo denied: {decision.reason}", reason=decision.reason)
        if until <= self.clock.now():
            raise PastTimestamp("embargo deadline must lie in the future")
        updated = self.store.set_policy(pid, record.policy.with_embargo(until), principal)
        return updated.policy

    # -- crates -------------------------------------------------------------------

    def import_crate(
        self,
        crate: WorkflowCrate | bytes,
        policy: AccessPolicy,
        principal: Principal,
    ) -> ComponentRecord:
        """Register a Workflow-RO-Crate as a workflow record.

        Attachments become namespace-internal file sources with checksums;
        the original crate bytes are retained for provenance.
        """
        crate_bytes: bytes | None = None
        if isinstance(crate, bytes):
            crate_bytes = crate
            try:
                crate = read_crate_zip(crate)
            except Exception as exc:
                raise InvalidCrate(f"unreadable crate archive: {exc}") from exc
        report = validate_crate(crate)
        if not report.valid:
            raise InvalidCrate("crate fails profile validation", report=report)

        document = document_from_crate(crate)
        main = crate.main_entity()
        main_path = main.id if (main is not None and main.id in crate.attachments) else None
        if main_path and "x_main_workflow" not in document:
            document["x_main_workflow"] = main_path
        doc_report = validate_document(document)
        if not doc_report.valid:
            raise InvalidCrate("crate metadata maps to an invalid document", report=doc_report)

        decision = authorize(principal, "register", policy, self.clock.now())
        if not decision:
            raise Unauthorized(f"register denied: {decision.reason}", reason=decision.reason)

        pid = self.store.minter.mint(self.config.namespace, ComponentKind.WORKFLOW)
        rendered = pid.rendered

        sources: list[SourceDescriptor] = []
        ordered_paths = sorted(crate.attachments)
        if main_path in crate.attachments:
            ordered_paths = [main_path] + [p for p in ordered_paths if p != main_path]
        attachment_writes: dict[str, bytes | None] = {}
        for path in ordered_paths:
            data = crate.attachments[path]
            checksum = compute_checksum(data)
            sources.append(
                SourceDescriptor(scheme="file", locator=f"{rendered}/{path}", checksum=checksum)
            )
            # oversized attachments stay by reference: checksum recorded, bytes
            # left to the bulk transport layer
            if len(data) <= self.config.attachment_limit:
                attachment_writes[f"attach/{rendered}/{path}"] = data
        if not sources:
            # metadata-only crates keep their external main entity as the source
            locator = main.id if main is not None else "about:crate"
            sources.append(SourceDescriptor(scheme="https", locator=locator))
        self.storage.put_many(attachment_writes)
        if crate_bytes is None:
            crate_bytes = write_crate_zip(crate)
        self.storage.put_many({f"origcrate/{rendered}": crate_bytes})

        record = self.store.register(document, sources, policy, principal, pid=pid)
        self._store_descriptor_if_workflow(record)
        return record

    def export_crate(self, pid: str, principal: Principal) -> WorkflowCrate:
        """Build the interchange crate for a record.

        Tombstoned records export metadata-only crates with the tombstone
        marker; the produced crate always passes validate_crate.
        """
        record = self._require_full_view(pid, principal)
        attachments: dict[str, bytes] = {}
        prefix = f"attach/{pid}/"
        for key, data in self.storage.scan(prefix):
            attachments[key[len(prefix) :]] = data
        main_path = record.document.get("x_main_workflow")
        source_locator = None
        if not attachments and record.sources:
            source = record.sources[0]
            locator = source.locator
            source_locator = locator if "://" in locator else f"{source.scheme}://{locator}"
        crate = crate_from_record(
            pid,
            record.document,
            attachments,
            kind=record.kind.value,
            created_at=to_iso(record.created_at),
            main_path=main_path if main_path in attachments else None,
            source_locator=source_locator,
            tombstone=record.tombstone.to_json() if record.tombstone else None,
        )
        return crate

    def export_crate_zip(self, pid: str, principal: Principal) -> bytes:
        """Crate download; the artifact path proper, so tombstoned is Gone."""
        record = self._require_full_view(pid, principal)
        if record.status == TOMBSTONED:
            raise Tombstoned(f"{pid} is tombstoned; artifact retrieval is gone")
        return write_crate_zip(self.export_crate(pid, principal))

    def original_crate(self, pid: str) -> bytes | None:
        return self.storage.get(f"origcrate/{pid}")

    def _require_full_view(self, pid: str, principal: Principal) -> ComponentRecord:
        record = self.store.get_record(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        level = visibility_level(record.policy, principal, self.clock.now())
        if level == "none":
            raise NotFound(f"no record for {pid}")
        if level != "full":
            raise Unauthorized("full visibility required", reason="not-visible")
        return record

    def _store_descriptor_if_workflow(self, record: ComponentRecord) -> None:
        if record.kind != ComponentKind.WORKFLOW:
            return
        main_path = record.document.get("x_main_workflow")
        if not main_path:
            return
        data = self.storage.get(f"attach/{record.pid.rendered}/{main_path}")
        if data is None:
            return
        dialect = guess_dialect(data, str(main_path))
        if dialect is None:
            return
        try:
            descriptor = extract_abstract_workflow(data, dialect)
        except Exception as exc:
            logger.warning("descriptor extraction failed for %s: %s", record.pid.rendered, exc)
            return
        key = f"descriptor/{record.pid.rendered}/{record.version:08d}"
        self.storage.put_many({key: canonical_json_bytes(descriptor.to_json())})

    # -- assessment ------------------------------------------------------------

    def assess(self, pid: str, principal: Principal) -> FairnessReport:
        """Run the FAIR checklist and attach the report to the record."""
        record = self.store.get_record(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        decision = authorize(principal, "assess", record.policy, self.clock.now())
        if not decision:
            raise Unauthorized(f"assess denied: {decision.reason}", reason=decision.reason)

        name = str(record.document.get("name", ""))
        insider = Principal(
            subject=next(iter(sorted(record.policy.owners))),
            enclaves=frozenset({record.policy.enclave}),
            roles=frozenset({"reader"}),
        )
        page = self.store.search(
            SearchQuery(text=name, limit=100, include_tombstoned=True), insider
        )
        indexed = any(item.get("pid") == pid for item in page.items)

        refs = list(record.document.get("derived_from") or []) + list(
            record.document.get("target_machine") or []
        )
        references_resolve = all(
            is_valid_pid(ref) and self.store.exists(ref) for ref in refs
        ) if refs else None

        usage = self.store.get_usage(pid)
        report = evaluate_checks(
            pid=pid,
            version=record.version,
            document=record.document,
            sources=[s.to_json() for s in record.sources],
            status=record.status,
            indexed=indexed,
            references_resolve=references_resolve,
            has_run_links=bool(usage and usage.get("run_count")),
            document_valid=validate_document(record.document).valid,
        )
        self.store.set_fairness(pid, report.to_json())
        return report

    # -- watchers / provenance ----------------------------------------------------

    def watch(self, pid: str, source_index: int = 0, poll_interval: int | None = None):
        interval = poll_interval or self.config.default_poll_interval
        return self.watcher.watch(pid, source_index, interval)

    def force_poll(self) -> dict[str, list]:
        return self.scheduler.force_poll_all()

    def verify_artifact(self, pid: str) -> dict[str, Any]:
        return self.watcher.verify_artifact(pid)

    def run_viability_check(self, pid: str) -> dict[str, Any]:
        with self._sandbox_slots:  # bounded worker pool
            return run_viability_check(
                self.store, pid, self.runner, self.clock, timeout=self.config.viability_timeout
            )

    def ingest_provenance(self, payload: str | bytes | Iterable[dict]) -> IngestSummary:
        if isinstance(payload, (str, bytes)):
            payload = iter_ndjson(payload)
        return self.ledger.ingest(payload)

    def register_machine(
        self, desc: MachineDescription, principal: Principal, enclave: str | None = None
    ) -> str:
        if enclave is None:
            enclave = next(iter(sorted(principal.enclaves)), "operations")
        policy = AccessPolicy(
            enclave=enclave, visibility="public", owners=frozenset({principal.subject})
        )
        return register_machine(self.store, desc, policy, principal)

    def list_machines(self, principal: Principal) -> list[dict[str, Any]]:
        machines = []
        now = self.clock.now()
        for pid in self.store.all_pids():
            record = self.store.get_record(pid)
            if record is None or record.kind != ComponentKind.SERVICE:
                continue
            if not is_machine_record(record.document):
                continue
            view = apply_visibility(record, principal, now)
            if view is not None:
                machines.append(view)
        return machines

    # -- federation ------------------------------------------------------------------

    def trs_list_tools(self, **kwargs) -> dict[str, Any]:
        return self.federation.trs_list_tools(**kwargs)

    def trs_get_tool_version(self, tool_id: str, version_id: str, **kwargs) -> dict[str, Any]:
        return self.federation.trs_get_tool_version(tool_id, version_id, **kwargs)

    def sync_pull(
        self,
        remote: RemoteRegistry | str,
        principal: Principal,
        transport: RemoteTransport | None = None,
    ) -> SyncReport:
        if isinstance(remote, str):
            found = self.config.remote(remote)
            if found is None:
                raise NotFound(f"no remote named {remote!r} configured")
            remote = found
        decision = authorize(
            principal,
            "sync",
            AccessPolicy(enclave="operations", owners=frozenset({"nobody"})),
            self.clock.now(),
        )
        if not decision:
            raise Unauthorized(f"sync denied: {decision.reason}", reason=decision.reason)
        if transport is None:
            transport = HttpTransport(remote.base_url)
        report = self.federation.sync_pull(remote, transport)
        remote.last_sync_cursor = report.new_cursor
        return report

    # -- lifecycle -------------------------------------------------------------------

    def start_background_workers(self) -> None:
        if self.config.enable_watch_loop:
            self.scheduler.start()
        if self.config.sync_interval > 0 and self.config.remotes:
            self._start_sync_loop()

    def _start_sync_loop(self) -> None:
        import threading

        self._sync_stop = threading.Event()

        def loop():
            from .access import Principal

            operator = Principal(
                subject="system:sync-scheduler", roles=frozenset({"admin"})
            )
            while not self._sync_stop.wait(self.config.sync_interval):
                for remote in self.config.remotes:
                    if self._sync_stop.is_set():
                        return
                    try:
                        self.sync_pull(remote, operator)
                    except Exception:
                        logger.exception("scheduled sync of %s failed", remote.name)

        self._sync_thread = threading.Thread(
            target=loop, daemon=True, name="componenthub-sync"
        )
        self._sync_thread.start()

    def close(self) -> None:
        stop = getattr(self, "_sync_stop", None)
        if stop is not None:
            stop.set()
            self._sync_thread.join(timeout=5)
        self.scheduler.stop()
        self.storage.close()

    def health(self) -> dict[str, Any]:
        components = {
            "storage": "ready",
            "store": "ready",
            "federation": "ready",
            "watchers": "ready",
        }
        try:
            self.storage.get("record/healthcheck")
        except Exception:
            components["storage"] = "unavailable"
        status = "ready" if all(v == "ready" for v in components.values()) else "degraded"
        return {"status": status, "namespace": self.config.namespace, "components": components}


def build_policy(
    data: dict[str, Any] | None,
    principal: Principal,
    *,
    default_enclave: str | None = None,
) -> AccessPolicy:
    """Policy from a request body; owners default to the calling principal."""
    data = dict(data or {})
    enclave = data.get("enclave") or default_enclave
    if enclave is None:
        enclave = next(iter(sorted(principal.enclaves)), "public")
    owners = frozenset(data.get("owners") or {principal.subject})
    embargo = data.get("embargo_until")
    return AccessPolicy(
        enclave=enclave,
        visibility=data.get("visibility", "public"),
        embargo_until=from_iso(embargo) if embargo else None,
        owners=owners,
        write_roles=data.get("write_roles", "contributor"),
    )


def parse_sources(raw: list[dict[str, Any]] | None) -> list[SourceDescriptor]:
    return [SourceDescriptor.from_json(s) for s in raw or []]
