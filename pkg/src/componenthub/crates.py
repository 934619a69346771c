"""Workflow-RO-Crate model: parsing, profile validation, packaging, mapping.

A crate is an entity graph (root dataset, main workflow, files, people,
license) plus attached files. On disk or on the wire it is a directory or
zip archive whose metadata lives in ``ro-crate-metadata.json`` as a JSON-LD
shaped entity array under ``@graph``. Parsing is lenient (unknown entity
types survive); validation is strict against the small profile the registry
exchanges.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from typing import Any

from .documents import Document, Issue, ValidationReport

METADATA_FILENAME = "ro-crate-metadata.json"
RO_CRATE_CONTEXT = "https://w3id.org/ro/crate/1.1/context"
RO_CRATE_SPEC_ID = "https://w3id.org/ro/crate/1.1"
WORKFLOW_PROFILE_ID = "https://w3id.org/workflowhub/workflow-ro-crate/1.0"

WORKFLOW_PROFILE = "workflow-ro-crate"
PLAIN_PROFILE = "ro-crate"

WORKFLOW_TYPE_MARKERS = ("ComputationalWorkflow", "Workflow")
CONTAINER_HINTS = ("dockerfile", "containerfile", "singularity.def")

# Document properties carried verbatim as root-entity keys so that
# import(export(record)) reproduces the document byte for byte.
_PASSTHROUGH_PROPERTIES = (
    "target_machine",
    "input_formats",
    "output_formats",
    "cite_as",
    "derived_from",
)


@dataclass
class CrateEntity:
    id: str
    types: list[str]
    properties: dict[str, Any] = field(default_factory=dict)

    def has_type(self, name: str) -> bool:
        return name in self.types

    def to_jsonld(self) -> dict[str, Any]:
        data: dict[str, Any] = {"@id": self.id}
        data["@type"] = self.types if len(self.types) != 1 else self.types[0]
        data.update(self.properties)
        return data


@dataclass
class WorkflowCrate:
    entities: list[CrateEntity] = field(default_factory=list)
    attachments: dict[str, bytes] = field(default_factory=dict)
    profile: str = WORKFLOW_PROFILE

    def get(self, entity_id: str) -> CrateEntity | None:
        for entity in self.entities:
            if entity.id == entity_id:
                return entity
        return None

    def descriptor(self) -> CrateEntity | None:
        return self.get(METADATA_FILENAME)

    def roots(self) -> list[CrateEntity]:
        descriptor = self.descriptor()
        if descriptor is not None:
            about = _ref_id(descriptor.properties.get("about"))
            if about:
                target = self.get(about)
                return [target] if target is not None else []
        return [e for e in self.entities if e.has_type("Dataset") and e.id == "./"]

    def root(self) -> CrateEntity | None:
        roots = self.roots()
        return roots[0] if len(roots) == 1 else None

    def main_entity(self) -> CrateEntity | None:
        root = self.root()
        if root is None:
            return None
        main_id = _ref_id(root.properties.get("mainEntity"))
        return self.get(main_id) if main_id else None

    def file_entities(self) -> list[CrateEntity]:
        return [e for e in self.entities if e.has_type("File")]


def _ref_id(value: Any) -> str | None:
    if isinstance(value, dict):
        return value.get("@id")
    if isinstance(value, str):
        return value
    return None


def _is_external(path: str) -> bool:
    return "://" in path or path.startswith("#")


# ---------------------------------------------------------------------------
# Parsing and packaging
# ---------------------------------------------------------------------------


def crate_to_jsonld(crate: WorkflowCrate) -> dict[str, Any]:
    return {"@context": RO_CRATE_CONTEXT, "@graph": [e.to_jsonld() for e in crate.entities]}


def crate_from_jsonld(data: dict[str, Any], attachments: dict[str, bytes] | None = None) -> WorkflowCrate:
    entities = []
    for raw in data.get("@graph", []):
        types = raw.get("@type", [])
        if isinstance(types, str):
            types = [types]
        properties = {k: v for k, v in raw.items() if k not in ("@id", "@type")}
        entities.append(CrateEntity(id=raw.get("@id", ""), types=list(types), properties=properties))
    crate = WorkflowCrate(entities=entities, attachments=dict(attachments or {}))
    crate.profile = _detect_profile(crate)
    return crate


def _detect_profile(crate: WorkflowCrate) -> str:
    descriptor = crate.descriptor()
    if descriptor is not None:
        conforms = descriptor.properties.get("conformsTo")
        ids = []
        if isinstance(conforms, list):
            ids = [_ref_id(c) for c in conforms]
        elif conforms is not None:
            ids = [_ref_id(conforms)]
        if any(i and "workflow-ro-crate" in i for i in ids):
            return WORKFLOW_PROFILE
    root = crate.root()
    if root is not None and root.properties.get("mainEntity"):
        return WORKFLOW_PROFILE
    return PLAIN_PROFILE


def write_crate_zip(crate: WorkflowCrate) -> bytes:
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        archive.writestr(
            METADATA_FILENAME,
            json.dumps(crate_to_jsonld(crate), indent=2, ensure_ascii=False),
        )
        for path in sorted(crate.attachments):
            archive.writestr(path, crate.attachments[path])
    return buffer.getvalue()


def read_crate_zip(data: bytes) -> WorkflowCrate:
    with zipfile.ZipFile(io.BytesIO(data)) as archive:
        names = archive.namelist()
        if METADATA_FILENAME not in names:
            raise ValueError(f"archive carries no {METADATA_FILENAME}")
        metadata = json.loads(archive.read(METADATA_FILENAME).decode("utf-8"))
        attachments = {
            name: archive.read(name)
            for name in names
            if name != METADATA_FILENAME and not name.endswith("/")
        }
    return crate_from_jsonld(metadata, attachments)


# ---------------------------------------------------------------------------
# Profile validation
# ---------------------------------------------------------------------------


def validate_crate(crate: WorkflowCrate) -> ValidationReport:
    """Strict check against the exchange profile. Pure; nothing is thrown.

    Workflow crates must name a main entity carrying a workflow type marker
    whose file is resolvable; plain crates skip the main-entity rules.
    """
    report = ValidationReport(subject="crate")

    if crate.descriptor() is None:
        report.issues.append(
            Issue("error", "metadata.descriptor", f"missing {METADATA_FILENAME} entity")
        )

    roots = crate.roots()
    if len(roots) != 1:
        report.issues.append(
            Issue("error", "root.single", f"expected exactly one root dataset, found {len(roots)}")
        )
        return report
    root = roots[0]

    if not root.properties.get("license"):
        report.issues.append(Issue("error", "root.license", "root entity carries no license"))
    authors = root.properties.get("author")
    if not authors or (isinstance(authors, list) and len(authors) == 0):
        report.issues.append(Issue("error", "root.author", "root entity names no author"))

    if crate.profile == WORKFLOW_PROFILE:
        main_id = _ref_id(root.properties.get("mainEntity"))
        if not main_id:
            report.issues.append(Issue("error", "root.main", "root names no main entity"))
        else:
            main = crate.get(main_id)
            if main is None:
                report.issues.append(
                    Issue("error", "root.main", f"main entity {main_id!r} is not in the graph")
                )
            else:
                if not any(main.has_type(marker) for marker in WORKFLOW_TYPE_MARKERS):
                    report.issues.append(
                        Issue(
                            "error",
                            "main.workflow-type",
                            "main entity carries no workflow type marker",
                        )
                    )
                if not _is_external(main.id) and main.id not in crate.attachments:
                    report.issues.append(
                        Issue("error", "main.file-missing", f"main file {main.id!r} is not attached")
                    )

    for entity in crate.file_entities():
        if _is_external(entity.id) or entity.id in crate.attachments:
            continue
        main_id = _ref_id(root.properties.get("mainEntity"))
        if entity.id == main_id:
            continue  # already reported as main.file-missing
        report.issues.append(
            Issue("error", "file.resolvable", f"file {entity.id!r} is not attached")
        )

    for path in crate.attachments:
        if path.rsplit("/", 1)[-1].lower() in CONTAINER_HINTS:
            report.issues.append(
                Issue(
                    "warning",
                    "secondary.container-artifacts",
                    f"crate bundles container recipe {path!r} alongside the workflow",
                )
            )

    return report


# ---------------------------------------------------------------------------
# Record <-> crate mapping
# ---------------------------------------------------------------------------


def document_from_crate(crate: WorkflowCrate) -> Document:
    """Map crate entity properties into a metadata document.

    The root's `identifier` (a PID on exported crates) is deliberately not
    imported: the importing registry mints its own identity.
    """
    root = crate.root()
    if root is None:
        raise ValueError("crate has no root entity")
    props = root.properties

    doc: Document = {
        "name": props.get("name", ""),
        "description": props.get("description", ""),
        "kind": "workflow",
        "license": _ref_id(props.get("license")) or "",
        "authors": _authors_from_crate(crate, props.get("author")),
        "keywords": _keywords(props.get("keywords")),
    }

    main = crate.main_entity()
    if main is not None:
        language = main.properties.get("programmingLanguage")
        if isinstance(language, dict):
            language = language.get("@id") or language.get("name")
        if isinstance(language, str) and language:
            doc["programming_language"] = language

    for prop in _PASSTHROUGH_PROPERTIES:
        if prop in props:
            doc[prop] = props[prop]
    for prop, value in props.items():
        if prop.startswith("x_"):
            doc[prop] = value
    return doc


def _authors_from_crate(crate: WorkflowCrate, refs: Any) -> list[dict[str, str]]:
    if refs is None:
        return []
    if not isinstance(refs, list):
        refs = [refs]
    authors = []
    for ref in refs:
        if isinstance(ref, dict) and "@id" not in ref:
            entry = {"name": ref.get("name", "")}
            if ref.get("identifier"):
                entry["identifier"] = ref["identifier"]
            authors.append(entry)
            continue
        ref_id = _ref_id(ref)
        person = crate.get(ref_id) if ref_id else None
        if person is not None:
            entry = {"name": person.properties.get("name", ref_id or "")}
            identifier = person.properties.get("identifier")
            if identifier:
                entry["identifier"] = identifier
            authors.append(entry)
        elif ref_id:
            authors.append({"name": ref_id.lstrip("#")})
    return authors


def _keywords(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [k.strip() for k in value.split(",") if k.strip()]
    return [str(k) for k in value]


def crate_from_record(
    pid: str,
    document: Document,
    attachments: dict[str, bytes],
    *,
    kind: str,
    created_at: str,
    main_path: str | None = None,
    source_locator: str | None = None,
    tombstone: dict[str, Any] | None = None,
) -> WorkflowCrate:
    """Build the export crate for a record.

    Workflow records get the workflow profile with a main entity; other
    kinds and tombstoned records export as plain crates. Tombstoned exports
    carry no attachments and mark the root with the tombstone note.
    """
    is_workflow = kind == "workflow" and tombstone is None
    profile = WORKFLOW_PROFILE if is_workflow else PLAIN_PROFILE
    conforms: list[dict[str, str]] = [{"@id": RO_CRATE_SPEC_ID}]
    if is_workflow:
        conforms.append({"@id": WORKFLOW_PROFILE_ID})

    license_id = document.get("license", "")
    root_props: dict[str, Any] = {
        "identifier": pid,
        "name": document.get("name", ""),
        "description": document.get("description", ""),
        "license": {"@id": license_id},
        "keywords": list(document.get("keywords", [])),
        "datePublished": created_at,
    }
    for prop in _PASSTHROUGH_PROPERTIES:
        if prop in document:
            root_props[prop] = document[prop]
    for prop, value in document.items():
        if prop.startswith("x_"):
            root_props[prop] = value
    if tombstone is not None:
        root_props["tombstoned"] = True
        root_props["tombstone_reason"] = tombstone.get("reason", "")
        root_props["tombstone_removed_at"] = tombstone.get("removed_at", "")

    entities = [
        CrateEntity(
            id=METADATA_FILENAME,
            types=["CreativeWork"],
            properties={"about": {"@id": "./"}, "conformsTo": conforms},
        )
    ]

    author_refs = []
    people = []
    for i, author in enumerate(document.get("authors", []), start=1):
        person_id = f"#author-{i}"
        author_refs.append({"@id": person_id})
        person_props: dict[str, Any] = {"name": author.get("name", "")}
        if author.get("identifier"):
            person_props["identifier"] = author["identifier"]
        people.append(CrateEntity(id=person_id, types=["Person"], properties=person_props))
    root_props["author"] = author_refs

    if is_workflow:
        main_id = main_path or source_locator
        if main_id:
            root_props["mainEntity"] = {"@id": main_id}

    entities.append(CrateEntity(id="./", types=["Dataset"], properties=root_props))
    entities.extend(people)
    if license_id:
        entities.append(CrateEntity(id=license_id, types=["CreativeWork"], properties={}))

    if is_workflow:
        main_id = main_path or source_locator
        if main_id:
            main_props: dict[str, Any] = {"name": document.get("name", "")}
            language = document.get("programming_language")
            if language:
                main_props["programmingLanguage"] = language
            entities.append(
                CrateEntity(
                    id=main_id,
                    types=["File", "SoftwareSourceCode", "ComputationalWorkflow"],
                    properties=main_props,
                )
            )
    if tombstone is None:
        for path in sorted(attachments):
            if is_workflow and path == main_path:
                continue
            entities.append(CrateEntity(id=path, types=["File"], properties={}))

    crate = WorkflowCrate(
        entities=entities,
        attachments={} if tombstone is not None else dict(attachments),
        profile=profile,
    )
    return crate


__all__ = [
    "METADATA_FILENAME",
    "WORKFLOW_PROFILE",
    "PLAIN_PROFILE",
    "CrateEntity",
    "WorkflowCrate",
    "crate_from_jsonld",
    "crate_to_jsonld",
    "crate_from_record",
    "document_from_crate",
    "read_crate_zip",
    "validate_crate",
    "write_crate_zip",
]
