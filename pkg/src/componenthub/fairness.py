"""Executable FAIR checklist and badge levels.

Twelve checks, one per sub-principle, each graded pass / fail /
not-applicable with an evidence string. The score is the count of passes;
badges make the desired behavior visible: none <6, bronze 6-8, silver 9-11,
gold 12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .documents import (
    KNOWN_PROPERTIES,
    SOURCE_SCHEMES,
    canonicalize_document,
)
from .errors import InvalidDocument

CHECK_IDS = ("F1", "F2", "F3", "F4", "A1", "A2", "I1", "I2", "I3", "R1", "R1_1", "R1_2")

BADGE_THRESHOLDS = ((12, "gold"), (9, "silver"), (6, "bronze"), (0, "none"))

MIN_DESCRIPTION_LENGTH = 50


@dataclass(frozen=True)
class FairnessCheck:
    id: str
    description: str
    result: str  # pass | fail | not-applicable
    evidence: str

    def to_json(self) -> dict[str, str]:
        return {
            "id": self.id,
            "description": self.description,
            "result": self.result,
            "evidence": self.evidence,
        }


@dataclass
class FairnessReport:
    pid: str
    version: int
    checks: list[FairnessCheck]

    @property
    def score(self) -> int:
        return sum(1 for c in self.checks if c.result == "pass")

    @property
    def badge(self) -> str:
        return badge_for_score(self.score)

    def to_json(self) -> dict[str, Any]:
        return {
            "pid": self.pid,
            "version": self.version,
            "checks": [c.to_json() for c in self.checks],
            "score": self.score,
            "badge": self.badge,
        }


def badge_for_score(score: int) -> str:
    for threshold, badge in BADGE_THRESHOLDS:
        if score >= threshold:
            return badge
    return "none"


def evaluate_checks(
    *,
    pid: str,
    version: int,
    document: dict[str, Any],
    sources: list[dict[str, Any]],
    status: str,
    indexed: bool,
    references_resolve: bool | None,
    has_run_links: bool,
    document_valid: bool,
) -> FairnessReport:
    """Grade one record version. Deterministic: same inputs, same report.

    The caller supplies the search self-test result (``indexed``) and the
    reference-resolution result so the rubric itself stays a pure function.
    """
    checks: list[FairnessCheck] = []

    def add(check_id: str, description: str, result: str, evidence: str) -> None:
        checks.append(FairnessCheck(check_id, description, result, evidence))

    add(
        "F1",
        "record is bound to a persistent identifier",
        "pass",
        f"PID {pid} minted and immutable",
    )
    add(
        "F2",
        "record carries the required rich metadata",
        "pass" if document_valid else "fail",
        "all required properties present" if document_valid else "required properties missing",
    )

    cite = str(document.get("cite_as", "") or "")
    embeds_pid = pid in cite or pid in str(document.get("x_pid", "") or "")
    add(
        "F3",
        "metadata explicitly embeds the record's own identifier",
        "pass" if embeds_pid else "fail",
        f"cite_as references {pid}" if embeds_pid else "document never cites its own PID",
    )
    add(
        "F4",
        "record is indexed in the searchable registry",
        "pass" if indexed else "fail",
        "name query finds the record" if indexed else "search self-test missed the record",
    )

    supported = [s for s in sources if s.get("scheme") in SOURCE_SCHEMES]
    add(
        "A1",
        "at least one retrievable source over a supported scheme",
        "pass" if supported else "fail",
        f"{len(supported)} source(s) with supported schemes"
        if supported
        else "no retrievable source on record",
    )
    add(
        "A2",
        "metadata stays accessible after the artifact is gone",
        "pass",
        "tombstoning preserves the full document and history by construction",
    )

    try:
        canonicalize_document(document)
        add("I1", "metadata renders to canonical machine-readable bytes", "pass",
            "canonical JSON rendering succeeded")
    except InvalidDocument:
        add("I1", "metadata renders to canonical machine-readable bytes", "fail",
            "canonicalization rejected the document")

    unknown = [
        p for p in document if p not in KNOWN_PROPERTIES and not str(p).startswith("x_")
    ]
    add(
        "I2",
        "properties conform to the registered vocabulary",
        "fail" if unknown else "pass",
        f"un-namespaced properties: {unknown}" if unknown else "all properties known or x_-namespaced",
    )

    refs = list(document.get("derived_from") or []) + list(document.get("target_machine") or [])
    if not refs:
        add("I3", "qualified references resolve to registered records", "not-applicable",
            "no derived_from or target_machine references")
    else:
        add(
            "I3",
            "qualified references resolve to registered records",
            "pass" if references_resolve else "fail",
            f"{len(refs)} reference(s) checked against the registry",
        )

    description = str(document.get("description", "") or "")
    add(
        "R1",
        "description is substantial enough to judge reuse",
        "pass" if len(description) >= MIN_DESCRIPTION_LENGTH else "fail",
        f"description length {len(description)} (minimum {MIN_DESCRIPTION_LENGTH})",
    )
    license_value = str(document.get("license", "") or "").strip()
    add(
        "R1_1",
        "a usage license is declared",
        "pass" if license_value else "fail",
        f"license {license_value!r}" if license_value else "no license declared",
    )
    has_provenance = has_run_links or bool(document.get("derived_from"))
    add(
        "R1_2",
        "provenance links the record to runs or ancestry",
        "pass" if has_provenance else "fail",
        "run records or derived_from lineage present"
        if has_provenance
        else "no run records and no ancestry",
    )

    return FairnessReport(pid=pid, version=version, checks=checks)
