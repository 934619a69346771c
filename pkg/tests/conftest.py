"""Shared fixtures: frozen clock, in-memory service, principals, crate builder."""

from __future__ import annotations

import json

import pytest

from componenthub.access import AccessPolicy, Principal
from componenthub.clock import FixedClock
from componenthub.config import ServiceConfig
from componenthub.crates import CrateEntity, WorkflowCrate, METADATA_FILENAME
from componenthub.service import RegistryService
from componenthub.storage import MemoryStorage
from componenthub.watchers import FakeFetcher, FakeRunner

DEFAULT_ENCLAVE = "hpc"

ALICE = Principal(
    subject="alice",
    display_name="Alice",
    enclaves=frozenset({DEFAULT_ENCLAVE}),
    roles=frozenset({"contributor"}),
)
CARA = Principal(
    subject="cara",
    display_name="Cara the curator",
    enclaves=frozenset({DEFAULT_ENCLAVE}),
    roles=frozenset({"curator"}),
)
ADMIN = Principal(
    subject="root",
    display_name="Operator",
    enclaves=frozenset({DEFAULT_ENCLAVE, "operations"}),
    roles=frozenset({"admin"}),
)
OUTSIDER = Principal(
    subject="oscar",
    display_name="Oscar from elsewhere",
    enclaves=frozenset({"elsewhere"}),
    roles=frozenset({"contributor"}),
)


def make_policy(**overrides) -> AccessPolicy:
    defaults = dict(
        enclave=DEFAULT_ENCLAVE,
        visibility="public",
        owners=frozenset({"alice"}),
    )
    defaults.update(overrides)
    if not isinstance(defaults["owners"], frozenset):
        defaults["owners"] = frozenset(defaults["owners"])
    return AccessPolicy(**defaults)


def make_document(**overrides) -> dict:
    doc = {
        "name": "align-reads",
        "description": "Aligns sequencing reads against a reference genome at scale.",
        "kind": "workflow",
        "license": "Apache-2.0",
        "authors": [{"name": "Alice"}],
        "keywords": ["alignment", "genomics"],
    }
    doc.update(overrides)
    return doc


def make_service(
    clock=None,
    namespace: str = "olcf",
    fetcher=None,
    runner=None,
    storage=None,
    **config_overrides,
) -> RegistryService:
    config = ServiceConfig(namespace=namespace, storage_path=None, **config_overrides)
    return RegistryService(
        config,
        storage=storage if storage is not None else MemoryStorage(),
        clock=clock or FixedClock("2026-06-01T00:00:00Z"),
        fetcher=fetcher if fetcher is not None else FakeFetcher(),
        runner=runner if runner is not None else FakeRunner(),
    )


@pytest.fixture
def clock() -> FixedClock:
    return FixedClock("2026-06-01T00:00:00Z")


@pytest.fixture
def service(clock) -> RegistryService:
    svc = make_service(clock=clock)
    yield svc
    svc.close()


def make_crate(
    name: str = "align-reads",
    *,
    description: str = "Aligns sequencing reads against a reference genome at scale.",
    license_id: str = "Apache-2.0",
    authors: list[dict] | None = None,
    keywords: list[str] | None = None,
    extra_files: dict[str, bytes] | None = None,
    workflow_text: str | None = None,
) -> WorkflowCrate:
    """A minimal well-formed Workflow-RO-Crate with a CWL main file."""
    authors = authors or [{"name": "Alice"}]
    keywords = keywords if keywords is not None else ["alignment", "genomics"]
    workflow_text = workflow_text or (
        "cwlVersion: v1.2\n"
        "class: Workflow\n"
        "inputs:\n  reads: File\n"
        "outputs:\n  aligned:\n    type: File\n    outputSource: align/bam\n"
        "steps:\n"
        "  align:\n"
        "    run: tools/bwa.cwl\n"
        "    in:\n      fastq: reads\n"
        "    out: [bam]\n"
    )
    attachments = {"workflow.cwl": workflow_text.encode("utf-8")}
    attachments.update(extra_files or {})

    entities = [
        CrateEntity(
            id=METADATA_FILENAME,
            types=["CreativeWork"],
            properties={
                "about": {"@id": "./"},
                "conformsTo": [
                    {"@id": "https://w3id.org/ro/crate/1.1"},
                    {"@id": "https://w3id.org/workflowhub/workflow-ro-crate/1.0"},
                ],
            },
        ),
        CrateEntity(
            id="./",
            types=["Dataset"],
            properties={
                "name": name,
                "description": description,
                "license": {"@id": license_id},
                "keywords": list(keywords),
                "author": [{"@id": f"#author-{i + 1}"} for i in range(len(authors))],
                "mainEntity": {"@id": "workflow.cwl"},
            },
        ),
        CrateEntity(
            id="workflow.cwl",
            types=["File", "SoftwareSourceCode", "ComputationalWorkflow"],
            properties={"name": name, "programmingLanguage": "cwl"},
        ),
        CrateEntity(id=license_id, types=["CreativeWork"], properties={}),
    ]
    for i, author in enumerate(authors, start=1):
        props = {"name": author["name"]}
        if author.get("identifier"):
            props["identifier"] = author["identifier"]
        entities.append(CrateEntity(id=f"#author-{i}", types=["Person"], properties=props))
    for path in attachments:
        if path != "workflow.cwl":
            entities.append(CrateEntity(id=path, types=["File"], properties={}))

    return WorkflowCrate(entities=entities, attachments=attachments, profile="workflow-ro-crate")


def pretty(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=str)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or getattr(report, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1]
            criterion = name.removeprefix("test_").replace("_", " ")
            lines.append((criterion, label))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for criterion, label in sorted(lines):
            terminalreporter.write_line(f"[{label}] {criterion}")
