"""HTTP front door: the versioned registry API plus the TRS surface.

Every endpoint maps onto one service operation; the CLI calls the same
operations in-process, which is what keeps the two surfaces byte-equivalent.
Domain errors translate to exactly one status code each: NotFound 404,
authentication 401, authorization 403, tombstoned artifact paths 410,
invalid documents/crates 422, conflicts 409.
"""

from __future__ import annotations

import logging
import threading
import time
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from .access import Principal
from .clock import from_iso
from .config import ServiceConfig
from .errors import (
    AlreadyTombstoned,
    ComponentHubError,
    ConfigInvalid,
    CounterExhausted,
    InvalidCrate,
    InvalidDocument,
    MalformedQuery,
    NamespaceMismatch,
    NotFound,
    PastTimestamp,
    RemoteUnreachable,
    SourceUnreachable,
    StorageUnavailable,
    TokenExpired,
    TokenInvalid,
    Tombstoned,
    Unauthorized,
    VersionNotFound,
)
from .provenance import MachineDescription
from .service import RegistryService, build_policy, parse_sources
from .store import SearchQuery

logger = logging.getLogger("componenthub.gateway")

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (TokenExpired, 401),
    (TokenInvalid, 401),
    (Unauthorized, 403),
    (VersionNotFound, 404),
    (NotFound, 404),
    (AlreadyTombstoned, 409),
    (NamespaceMismatch, 409),
    (CounterExhausted, 409),
    (Tombstoned, 410),
    (InvalidDocument, 422),
    (InvalidCrate, 422),
    (PastTimestamp, 422),
    (SourceUnreachable, 422),
    (MalformedQuery, 400),
    (RemoteUnreachable, 502),
    (StorageUnavailable, 503),
]


def _error_response(exc: ComponentHubError) -> JSONResponse:
    status = 500
    for err_type, code in _STATUS_BY_ERROR:
        if isinstance(exc, err_type):
            status = code
            break
    body: dict[str, Any] = {"error": str(exc)}
    reason = getattr(exc, "reason", None)
    if reason:
        body["reason"] = reason
    report = getattr(exc, "report", None)
    if report is not None and hasattr(report, "to_json"):
        body["report"] = report.to_json()
    return JSONResponse(status_code=status, content=body)


def create_app(service: RegistryService) -> FastAPI:
    app = FastAPI(title="componenthub", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(ComponentHubError)
    async def handle_domain_error(request: Request, exc: ComponentHubError):
        return _error_response(exc)

    def principal(request: Request) -> Principal:
        header = request.headers.get("Authorization", "")
        token = header[len("Bearer ") :] if header.startswith("Bearer ") else None
        return service.authenticate(token)

    # -- health / identity ---------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return service.health()

    @app.get("/api/v1/whoami")
    def whoami(user: Principal = Depends(principal)):
        return {
            "subject": user.subject,
            "display_name": user.display_name,
            "enclaves": sorted(user.enclaves),
            "roles": sorted(user.roles),
            "issued_via": user.issued_via,
        }

    # -- records ---------------------------------------------------------------

    @app.post("/api/v1/records", status_code=201)
    async def register_record(request: Request, user: Principal = Depends(principal)):
        payload = await request.json()
        policy = build_policy(payload.get("policy"), user)
        record = service.register(
            payload.get("document") or {},
            parse_sources(payload.get("sources")),
            policy,
            user,
        )
        return service.resolve(record.pid.rendered, user)

    @app.get("/api/v1/records/{pid}")
    def resolve_record(pid: str, user: Principal = Depends(principal)):
        return service.resolve(pid, user)

    @app.patch("/api/v1/records/{pid}")
    async def update_record(pid: str, request: Request, user: Principal = Depends(principal)):
        payload = await request.json()
        sources = parse_sources(payload["sources"]) if payload.get("sources") else None
        service.update(pid, user, payload.get("document"), sources)
        return service.resolve(pid, user)

    @app.delete("/api/v1/records/{pid}")
    async def tombstone_record(pid: str, request: Request, user: Principal = Depends(principal)):
        body = await request.body()
        reason = ""
        if body:
            import json as _json

            reason = (_json.loads(body) or {}).get("reason", "")
        note = service.tombstone(pid, reason, user)
        return note.to_json()

    @app.get("/api/v1/records/{pid}/versions")
    def record_versions(pid: str, user: Principal = Depends(principal)):
        return {"pid": pid, "versions": service.list_versions(pid, user)}

    @app.get("/api/v1/search")
    def search_records(
        q: str | None = None,
        kind: str | None = None,
        license: str | None = None,
        keyword: str | None = None,
        target_machine: str | None = None,
        status: str | None = None,
        namespace: str | None = None,
        offset: int = Query(default=0),
        limit: int = Query(default=20),
        include_tombstoned: bool = Query(default=False),
        user: Principal = Depends(principal),
    ):
        facets = {
            name: value
            for name, value in (
                ("kind", kind),
                ("license", license),
                ("keyword", keyword),
                ("target_machine", target_machine),
                ("status", status),
                ("namespace", namespace),
            )
            if value
        }
        query = SearchQuery(
            text=q,
            facets=facets,
            offset=offset,
            limit=limit,
            include_tombstoned=include_tombstoned,
        )
        return service.search(query, user).to_json()

    # -- crates ------------------------------------------------------------------

    @app.post("/api/v1/crates", status_code=201)
    async def import_crate(
        request: Request,
        visibility: str = Query(default="public"),
        enclave: str | None = Query(default=None),
        user: Principal = Depends(principal),
    ):
        data = await request.body()
        policy = build_policy({"visibility": visibility, "enclave": enclave}, user)
        record = service.import_crate(data, policy, user)
        return service.resolve(record.pid.rendered, user)

    @app.get("/api/v1/records/{pid}/crate")
    def export_crate(pid: str, user: Principal = Depends(principal)):
        data = service.export_crate_zip(pid, user)
        return Response(
            content=data,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{pid.replace(":", "_")}.crate.zip"'},
        )

    # -- provenance / machines ------------------------------------------------------

    @app.post("/api/v1/provenance")
    async def ingest_provenance(request: Request, user: Principal = Depends(principal)):
        body = await request.body()
        summary = service.ingest_provenance(body)
        return summary.to_json()

    @app.get("/api/v1/machines")
    def list_machines(user: Principal = Depends(principal)):
        return {"machines": service.list_machines(user)}

    @app.post("/api/v1/machines", status_code=201)
    async def register_machine(request: Request, user: Principal = Depends(principal)):
        payload = await request.json()
        enclave = payload.pop("enclave", None)
        desc = MachineDescription(
            name=payload.get("name", ""),
            architecture=payload.get("architecture", ""),
            accelerator=payload.get("accelerator", ""),
            scheduler=payload.get("scheduler", ""),
            commissioned=str(payload.get("commissioned", "")),
            decommission_planned=str(payload.get("decommission_planned", "")),
            site=payload.get("site", ""),
        )
        pid = service.register_machine(desc, user, enclave)
        return {"pid": pid}

    # -- assessment / embargo ---------------------------------------------------------

    @app.post("/api/v1/records/{pid}/assess")
    def assess_record(pid: str, user: Principal = Depends(principal)):
        return service.assess(pid, user).to_json()

    @app.post("/api/v1/records/{pid}/embargo")
    async def set_embargo(pid: str, request: Request, user: Principal = Depends(principal)):
        payload = await request.json()
        until = from_iso(payload["until"])
        policy = service.set_embargo(pid, until, user)
        return policy.to_json()

    # -- federation ----------------------------------------------------------------------

    @app.post("/api/v1/sync/{remote}")
    def sync_remote(remote: str, user: Principal = Depends(principal)):
        return service.sync_pull(remote, user).to_json()

    @app.get("/ga4gh/trs/v2/tools")
    def trs_tools(
        offset: int = Query(default=0),
        limit: int = Query(default=100),
        toolClass: str | None = Query(default=None),
        user: Principal = Depends(principal),
    ):
        return service.trs_list_tools(
            offset=offset, limit=limit, tool_class=toolClass, principal=user
        )

    @app.get("/ga4gh/trs/v2/tools/{tool_id}/versions/{version_id}/ABSTRACT/descriptor")
    def trs_descriptor(tool_id: str, version_id: str, user: Principal = Depends(principal)):
        return service.trs_get_tool_version(tool_id, version_id, principal=user)

    @app.get("/ga4gh/trs/v2/tools/{tool_id}/versions/{version_id}/containerfile")
    def trs_containerfile(tool_id: str, version_id: str):
        return JSONResponse(
            status_code=501, content={"error": "containerfile descriptors are not served"}
        )

    ui_path = service.config.ui_path
    if ui_path and Path(ui_path).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_path, html=True), name="ui")

    return app


class ServiceHandle:
    """A running gateway: the service, the uvicorn server, and its thread."""

    def __init__(self, service: RegistryService, server, thread: threading.Thread):
        self.service = service
        self._server = server
        self._thread = thread

    @property
    def port(self) -> int:
        return self._server.servers[0].sockets[0].getsockname()[1]

    def stop(self) -> None:
        """Graceful shutdown: drain in-flight writes, stop workers, close storage."""
        self._server.should_exit = True
        self._thread.join(timeout=10)
        self.service.close()


def serve(config: ServiceConfig, *, service: RegistryService | None = None) -> ServiceHandle:
    """Start the gateway and background workers; fail fast on bad config.

    Storage problems surface as StorageUnavailable before anything listens.
    Returns once the health endpoint is answering.
    """
    import uvicorn

    config.validate()
    if service is None:
        service = RegistryService(config)  # raises StorageUnavailable on bad paths
    app = create_app(service)
    service.start_background_workers()

    uv_config = uvicorn.Config(
        app,
        host=config.listen_host,
        port=config.listen_port,
        log_level="warning",
        access_log=False,
    )
    server = uvicorn.Server(uv_config)
    thread = threading.Thread(target=server.run, daemon=True, name="componenthub-gateway")
    thread.start()

    deadline = time.monotonic() + 5
    while not server.started:
        if time.monotonic() > deadline or not thread.is_alive():
            service.close()
            raise ConfigInvalid(
                f"gateway failed to start on {config.listen_host}:{config.listen_port}"
            )
        time.sleep(0.02)
    return ServiceHandle(service, server, thread)
