"""Command-line interface; every subcommand maps 1:1 onto a service operation.

Exit codes: 0 success, 1 domain error, 2 usage error. ``--json`` switches
output to machine-readable documents on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from .access import Principal
from .clock import from_iso
from .config import load_config
from .documents import SourceDescriptor
from .errors import ComponentHubError
from .provenance import MachineDescription
from .service import RegistryService, build_policy
from .store import SearchQuery


def parse_source_spec(spec: str) -> SourceDescriptor:
    """``scheme:locator[#ref]`` or a JSON object string."""
    spec = spec.strip()
    if spec.startswith("{"):
        return SourceDescriptor.from_json(json.loads(spec))
    if ":" not in spec:
        raise argparse.ArgumentTypeError(
            f"source {spec!r} must look like scheme:locator (e.g. git:https://host/repo)"
        )
    scheme, locator = spec.split(":", 1)
    ref = None
    if "#" in locator:
        locator, ref = locator.rsplit("#", 1)
    try:
        return SourceDescriptor(scheme=scheme, locator=locator, ref=ref)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    # global flags are legal before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="path to the service config file")
    common.add_argument("--token", default=argparse.SUPPRESS,
                        help="bearer token (default: COMPONENTHUB_TOKEN)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="componenthub",
        description="FAIR registry for HPC workflow components.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name: str, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("serve", help="run the gateway")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    p = add_parser("register", help="register a component or import a crate")
    p.add_argument("--crate", help="Workflow-RO-Crate zip to import")
    p.add_argument("--document", help="metadata document JSON file")
    p.add_argument("--source", action="append", type=parse_source_spec, default=[],
                   help="artifact source as scheme:locator[#ref] (repeatable)")
    p.add_argument("--visibility", default="public", choices=["public", "listed", "hidden"])
    p.add_argument("--enclave")

    p = add_parser("resolve", help="resolve a PID to its record")
    p.add_argument("pid")

    p = add_parser("search", help="search records")
    p.add_argument("--text")
    p.add_argument("--kind")
    p.add_argument("--license")
    p.add_argument("--keyword")
    p.add_argument("--target-machine", dest="target_machine")
    p.add_argument("--status")
    p.add_argument("--namespace")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--include-tombstoned", action="store_true")

    p = add_parser("update", help="patch a record's document or sources")
    p.add_argument("pid")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="set a string property")
    p.add_argument("--set-json", action="append", default=[], metavar="KEY=JSON",
                   help="set a property from a JSON value")
    p.add_argument("--remove", action="append", default=[], metavar="KEY")
    p.add_argument("--source", action="append", type=parse_source_spec, default=None)

    p = add_parser("tombstone", help="tombstone a record, keeping its metadata")
    p.add_argument("pid")
    p.add_argument("--reason", required=True)

    p = add_parser("import-crate", help="import a Workflow-RO-Crate zip")
    p.add_argument("crate")
    p.add_argument("--visibility", default="public", choices=["public", "listed", "hidden"])
    p.add_argument("--enclave")

    p = add_parser("export-crate", help="export a record as a crate zip")
    p.add_argument("pid")
    p.add_argument("--output", "-o", required=True)

    p = add_parser("assess", help="run the FAIR checklist on a record")
    p.add_argument("pid")

    p = add_parser("embargo", help="embargo a record until a future instant")
    p.add_argument("pid")
    p.add_argument("--until", required=True, help="ISO timestamp, e.g. 2027-01-01T00:00:00Z")

    p = add_parser("machine", help="machine (instrument) records")
    machine_sub = p.add_subparsers(dest="machine_command", required=True)
    m = machine_sub.add_parser("register", parents=[common],
                               help="register a machine description")
    m.add_argument("--name", required=True)
    m.add_argument("--architecture", default="")
    m.add_argument("--accelerator", default="")
    m.add_argument("--scheduler", default="")
    m.add_argument("--commissioned", default="")
    m.add_argument("--decommission-planned", dest="decommission_planned", default="")
    m.add_argument("--site", default="")
    m.add_argument("--enclave")
    machine_sub.add_parser("list", parents=[common], help="list machine records")

    p = add_parser("sync", help="pull from a configured remote registry")
    p.add_argument("remote")

    p = add_parser("provenance-ingest", help="ingest line-delimited provenance events")
    p.add_argument("file", help="NDJSON file, or '-' for stdin")

    return parser


def _emit(args, payload: dict[str, Any], human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        print(human)


def _load_document(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _principal(service: RegistryService, args) -> Principal:
    token = getattr(args, "token", None) or os.environ.get("COMPONENTHUB_TOKEN")
    return service.authenticate(token)


def _do_register(service: RegistryService, args, principal: Principal):
    policy = build_policy(
        {"visibility": args.visibility, "enclave": args.enclave}, principal
    )
    if args.crate:
        with open(args.crate, "rb") as fh:
            record = service.import_crate(fh.read(), policy, principal)
    else:
        if not args.document:
            raise ComponentHubError("register needs --crate or --document")
        document = _load_document(args.document)
        record = service.register(document, args.source, policy, principal)
    pid = record.pid.rendered
    _emit(args, service.resolve(pid, principal), pid)


def run(args, service: RegistryService) -> int:
    principal = _principal(service, args)

    if args.command in ("register",):
        _do_register(service, args, principal)

    elif args.command == "import-crate":
        policy = build_policy(
            {"visibility": args.visibility, "enclave": args.enclave}, principal
        )
        with open(args.crate, "rb") as fh:
            record = service.import_crate(fh.read(), policy, principal)
        pid = record.pid.rendered
        _emit(args, service.resolve(pid, principal), pid)

    elif args.command == "resolve":
        view = service.resolve(args.pid, principal)
        human = f"{view['pid']}  {view.get('name') or view.get('document', {}).get('name', '')}"
        if view.get("access") == "full":
            human += f"  v{view['version']}  {view['status']}"
        _emit(args, view, human)

    elif args.command == "search":
        facets = {
            name: getattr(args, name)
            for name in ("kind", "license", "keyword", "target_machine", "status", "namespace")
            if getattr(args, name)
        }
        page = service.search(
            SearchQuery(
                text=args.text,
                facets=facets,
                offset=args.offset,
                limit=args.limit,
                include_tombstoned=args.include_tombstoned,
            ),
            principal,
        )
        lines = [f"total {page.total}"]
        for item in page.items:
            name = item.get("name") or item.get("document", {}).get("name", "")
            lines.append(f"{item['pid']}  {name}")
        _emit(args, page.to_json(), "\n".join(lines))

    elif args.command == "update":
        patch: dict[str, Any] = {}
        for entry in args.set:
            key, _, value = entry.partition("=")
            patch[key] = value
        for entry in args.set_json:
            key, _, value = entry.partition("=")
            patch[key] = json.loads(value)
        for key in args.remove:
            patch[key] = None
        record = service.update(args.pid, principal, patch or None, args.source)
        _emit(args, service.resolve(args.pid, principal), f"{args.pid} -> v{record.version}")

    elif args.command == "tombstone":
        note = service.tombstone(args.pid, args.reason, principal)
        _emit(args, note.to_json(), f"{args.pid} tombstoned at final version {note.final_version}")

    elif args.command == "export-crate":
        data = service.export_crate_zip(args.pid, principal)
        with open(args.output, "wb") as fh:
            fh.write(data)
        _emit(args, {"pid": args.pid, "output": args.output, "bytes": len(data)},
              f"wrote {len(data)} bytes to {args.output}")

    elif args.command == "assess":
        report = service.assess(args.pid, principal)
        human = f"{args.pid}  score {report.score}/12  badge {report.badge}"
        _emit(args, report.to_json(), human)

    elif args.command == "embargo":
        policy = service.set_embargo(args.pid, from_iso(args.until), principal)
        _emit(args, policy.to_json(), f"{args.pid} embargoed until {args.until}")

    elif args.command == "machine":
        if args.machine_command == "register":
            desc = MachineDescription(
                name=args.name,
                architecture=args.architecture,
                accelerator=args.accelerator,
                scheduler=args.scheduler,
                commissioned=args.commissioned,
                decommission_planned=args.decommission_planned,
                site=args.site,
            )
            pid = service.register_machine(desc, principal, args.enclave)
            _emit(args, {"pid": pid}, pid)
        else:
            machines = service.list_machines(principal)
            lines = [f"{m['pid']}  {m.get('document', {}).get('name', '')}" for m in machines]
            _emit(args, {"machines": machines}, "\n".join(lines) or "no machines registered")

    elif args.command == "sync":
        report = service.sync_pull(args.remote, principal)
        human = (
            f"{args.remote}: pulled {report.pulled}, created {report.created}, "
            f"updated {report.updated}, conflicts {len(report.conflicts)}"
        )
        _emit(args, report.to_json(), human)

    elif args.command == "provenance-ingest":
        if args.file == "-":
            payload = sys.stdin.read()
        else:
            with open(args.file, "r", encoding="utf-8") as fh:
                payload = fh.read()
        summary = service.ingest_provenance(payload)
        human = (
            f"ingested {len(summary.runs)} run(s), {summary.malformed} malformed, "
            f"{summary.rejected_after_terminal} rejected after terminal"
        )
        _emit(args, summary.to_json(), human)

    else:  # pragma: no cover - argparse enforces the choices
        raise ComponentHubError(f"unknown command {args.command!r}")

    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    config_path = getattr(args, "config", None) or os.environ.get("COMPONENTHUB_CONFIG")
    try:
        config = load_config(config_path)
    except ComponentHubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "serve":
        if args.host:
            config.listen_host = args.host
        if args.port:
            config.listen_port = args.port
        from .gateway import serve

        try:
            handle = serve(config)
        except ComponentHubError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"listening on {config.listen_host}:{handle.port}", flush=True)
        try:
            while True:
                import time

                time.sleep(3600)
        except KeyboardInterrupt:
            handle.stop()
        return 0

    service = RegistryService(config)
    try:
        return run(args, service)
    except ComponentHubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        service.close()


if __name__ == "__main__":
    sys.exit(main())
