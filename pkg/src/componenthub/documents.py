"""Metadata document model: vocabulary, validation, canonical bytes, checksums.

A metadata document is an ordered property map (a plain dict). Required
properties make a record valid; recommended properties enrich it; unknown
properties are preserved but renamed under the ``x_`` namespace when the
document is canonicalized. Canonical bytes are the key-sorted,
whitespace-free UTF-8 JSON rendering of the normalized document, and they
are the equality basis for checksums and federation.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Any

from .errors import InvalidDocument
from .ids import ComponentKind, is_valid_pid

Document = dict[str, Any]

REQUIRED_PROPERTIES = ("name", "description", "kind", "license", "authors", "keywords")
RECOMMENDED_PROPERTIES = (
    "programming_language",
    "target_machine",
    "input_formats",
    "output_formats",
    "cite_as",
    "derived_from",
)
KNOWN_PROPERTIES = frozenset(REQUIRED_PROPERTIES) | frozenset(RECOMMENDED_PROPERTIES)

_PROPERTY_NAME = re.compile(r"^[a-z][a-z0-9_]*$")

SOURCE_SCHEMES = ("git", "oci", "https", "file", "doi")


@dataclass(frozen=True)
class Checksum:
    algorithm: str
    digest: str

    def __post_init__(self):
        if self.algorithm != "sha-256":
            raise ValueError(f"unsupported checksum algorithm {self.algorithm!r}")
        if len(self.digest) != 64 or any(c not in "0123456789abcdef" for c in self.digest):
            raise ValueError("digest must be 64 lowercase hex characters")

    def to_json(self) -> dict[str, str]:
        return {"algorithm": self.algorithm, "digest": self.digest}

    @classmethod
    def from_json(cls, data: dict[str, str]) -> "Checksum":
        return cls(algorithm=data["algorithm"], digest=data["digest"])


def compute_checksum(data: bytes) -> Checksum:
    """SHA-256 over the exact input bytes."""
    return Checksum(algorithm="sha-256", digest=hashlib.sha256(data).hexdigest())


@dataclass(frozen=True)
class SourceDescriptor:
    """Where one copy of the artifact lives and how to address it."""

    scheme: str
    locator: str
    ref: str | None = None
    checksum: Checksum | None = None

    def __post_init__(self):
        if self.scheme not in SOURCE_SCHEMES:
            raise ValueError(f"unsupported source scheme {self.scheme!r}")
        if not self.locator:
            raise ValueError("source locator must be non-empty")
        if self.scheme == "oci" and not self.ref:
            raise ValueError("oci sources require a tag or digest ref")

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"scheme": self.scheme, "locator": self.locator}
        if self.ref is not None:
            data["ref"] = self.ref
        if self.checksum is not None:
            data["checksum"] = self.checksum.to_json()
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SourceDescriptor":
        checksum = data.get("checksum")
        return cls(
            scheme=data["scheme"],
            locator=data["locator"],
            ref=data.get("ref"),
            checksum=Checksum.from_json(checksum) if checksum else None,
        )


@dataclass(frozen=True)
class Issue:
    severity: str
    property: str
    message: str

    def to_json(self) -> dict[str, str]:
        return {"severity": self.severity, "property": self.property, "message": self.message}


@dataclass
class ValidationReport:
    subject: str = "unregistered"
    issues: list[Issue] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    def to_json(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "valid": self.valid,
            "issues": [i.to_json() for i in self.issues],
        }


def _check_string(report: ValidationReport, doc: Document, prop: str) -> None:
    value = doc.get(prop)
    if value is None or (isinstance(value, str) and not value.strip()):
        report.issues.append(Issue("error", prop, f"required property {prop!r} is missing or empty"))
    elif not isinstance(value, str):
        report.issues.append(Issue("error", prop, f"property {prop!r} must be a string"))


def validate_document(doc: Document, subject: str = "unregistered") -> ValidationReport:
    """Check a document against the vocabulary. Pure; problems are reported, not thrown."""
    report = ValidationReport(subject=subject)

    for prop in ("name", "description", "license"):
        _check_string(report, doc, prop)

    kind = doc.get("kind")
    if kind is None:
        report.issues.append(Issue("error", "kind", "required property 'kind' is missing"))
    else:
        try:
            ComponentKind.parse(str(kind))
        except ValueError:
            report.issues.append(Issue("error", "kind", f"unknown component kind {kind!r}"))

    authors = doc.get("authors")
    if not isinstance(authors, list) or not authors:
        report.issues.append(Issue("error", "authors", "authors must be a non-empty list"))
    else:
        for i, author in enumerate(authors):
            if not isinstance(author, dict) or not str(author.get("name", "")).strip():
                report.issues.append(
                    Issue("error", "authors", f"author #{i + 1} must carry a non-empty name")
                )

    keywords = doc.get("keywords")
    if keywords is None:
        report.issues.append(Issue("error", "keywords", "required property 'keywords' is missing"))
    elif not isinstance(keywords, list) or any(not isinstance(k, str) for k in keywords):
        report.issues.append(Issue("error", "keywords", "keywords must be a list of strings"))

    for prop in ("target_machine", "input_formats", "output_formats", "derived_from"):
        value = doc.get(prop)
        if value is not None and (
            not isinstance(value, list) or any(not isinstance(v, str) for v in value)
        ):
            report.issues.append(Issue("warning", prop, f"{prop} should be a list of strings"))
    for prop in ("programming_language", "cite_as"):
        value = doc.get(prop)
        if value is not None and not isinstance(value, str):
            report.issues.append(Issue("warning", prop, f"{prop} should be a string"))
    for pid_list in ("target_machine", "derived_from"):
        for v in doc.get(pid_list) or []:
            if isinstance(v, str) and not is_valid_pid(v):
                report.issues.append(
                    Issue("warning", pid_list, f"{v!r} does not look like a PID")
                )

    for prop in doc:
        if not isinstance(prop, str) or not _PROPERTY_NAME.match(prop):
            report.issues.append(
                Issue("error", str(prop), "property names must be lowercase snake_case")
            )
        elif prop not in KNOWN_PROPERTIES and not prop.startswith("x_"):
            report.issues.append(
                Issue(
                    "warning",
                    prop,
                    f"unknown property {prop!r} will be preserved as 'x_{prop}' on canonicalization",
                )
            )

    return report


def normalize_document(doc: Document) -> Document:
    """Return the canonical form of a document's content.

    Unknown properties move under ``x_``, the kind collapses to its string
    value, and all strings are put in composed Unicode normal form. The
    result is what canonical bytes are rendered from; input order of lists
    is preserved.
    """
    normalized: Document = {}
    for prop, value in doc.items():
        if prop == "kind":
            value = ComponentKind.parse(str(value)).value
        if prop not in KNOWN_PROPERTIES and not prop.startswith("x_"):
            prop = f"x_{prop}"
        normalized[prop] = _normalize_value(value)
    return normalized


def _normalize_value(value: Any) -> Any:
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, list):
        return [_normalize_value(v) for v in value]
    if isinstance(value, dict):
        return {unicodedata.normalize("NFC", str(k)): _normalize_value(v) for k, v in value.items()}
    return value


def canonical_json_bytes(data: Any) -> bytes:
    """Key-sorted, whitespace-free UTF-8 JSON rendering of arbitrary data."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def canonicalize_document(doc: Document) -> bytes:
    """Deterministic byte serialization of a valid document.

    Equal documents yield identical bytes regardless of property insertion
    order; canonicalizing twice is a fixpoint.
    """
    report = validate_document(doc)
    if not report.valid:
        raise InvalidDocument("document fails validation", report=report)
    return canonical_json_bytes(normalize_document(doc))


def document_checksum(doc: Document) -> Checksum:
    return compute_checksum(canonicalize_document(doc))
