#!/usr/bin/env python3
"""Generate oracle fixtures for the UI test suite from the registry package.

The UI keeps client-side replicas of canonicalization and the FAIR rubric;
these fixtures pin them against the authoritative Python implementation.
Run from frontend/: python3 scripts/gen_fixtures.py
"""

from __future__ import annotations

import base64
import json
import sys
from pathlib import Path

from componenthub.crates import document_from_crate, read_crate_zip, write_crate_zip
from componenthub.documents import canonicalize_document, validate_document
from componenthub.fairness import evaluate_checks

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "tests"))
from conftest import make_crate  # noqa: E402

DOCUMENTS = [
    {
        "name": "align-reads",
        "description": "Aligns sequencing reads against a reference genome at scale.",
        "kind": "workflow",
        "license": "Apache-2.0",
        "authors": [{"name": "Alice"}],
        "keywords": ["alignment", "genomics"],
    },
    {
        "name": "unicode-café",
        "description": "Composed and decomposed Á characters must render identically.",
        "kind": "dataset",
        "license": "proprietary",
        "authors": [{"name": "Björn", "identifier": "https://orcid.org/0000-0001"}],
        "keywords": [],
        "colour": "blue",
    },
    {
        "name": "rich-record",
        "description": "A record with every recommended property filled in for byte checks.",
        "kind": "model",
        "license": "MIT",
        "authors": [{"name": "Cara"}, {"name": "Dee"}],
        "keywords": ["ml", "surrogate"],
        "programming_language": "python",
        "target_machine": ["olcf:sv-00000001"],
        "input_formats": ["application/x-hdf5"],
        "output_formats": ["application/json"],
        "cite_as": "olcf:ml-00000001",
        "derived_from": ["olcf:ds-00000002"],
        "x_training_epochs": 40,
    },
    {
        "name": "weird keys",
        "description": "Unknown properties and nested structures exercise the renamer.",
        "kind": "code",
        "license": "BSD-3-Clause",
        "authors": [{"name": "E"}],
        "keywords": ["k"],
        "custom_notes": {"nested": ["a", "b"], "n": 3},
    },
]

FAIR_CASES = [
    {
        "pid": "olcf:wf-00000001",
        "document": DOCUMENTS[0],
        "sources": [{"scheme": "git", "locator": "https://git.example.org/a"}],
    },
    {
        "pid": "olcf:ml-00000001",
        "document": DOCUMENTS[2],
        "sources": [{"scheme": "file", "locator": "model.pt"}],
    },
    {
        "pid": "olcf:cd-00000009",
        "document": {
            "name": "bare",
            "description": "short.",
            "kind": "code",
            "license": "",
            "authors": [{"name": "F"}],
            "keywords": [],
            "oddball": 1,
        },
        "sources": [],
    },
]


def main() -> None:
    out = {
        "canonical": [
            {"document": doc, "canonical": canonicalize_document(doc).decode("utf-8")}
            for doc in DOCUMENTS
            if validate_document(doc).valid
        ],
        "fair": [],
        "crate": {},
    }

    for case in FAIR_CASES:
        doc = case["document"]
        refs = list(doc.get("derived_from") or []) + list(doc.get("target_machine") or [])
        report = evaluate_checks(
            pid=case["pid"],
            version=1,
            document=doc,
            sources=case["sources"],
            status="active",
            indexed=True,
            references_resolve=True if refs else None,
            has_run_links=False,
            document_valid=validate_document(doc).valid,
        )
        out["fair"].append(
            {
                "pid": case["pid"],
                "document": doc,
                "sources": case["sources"],
                "results": {c.id: c.result for c in report.checks},
                "score": report.score,
                "badge": report.badge,
            }
        )

    crate = make_crate(
        name="fixture-crate",
        description="Crate fixture for prefill parity between UI and registry import.",
        license_id="MIT",
        authors=[{"name": "Gia", "identifier": "https://orcid.org/0000-0002"}],
        keywords=["fixture", "zip"],
        extra_files={"data/params.json": b'{"threads": 8}'},
    )
    zip_bytes = write_crate_zip(crate)
    out["crate"] = {
        "zip_base64": base64.b64encode(zip_bytes).decode("ascii"),
        "entries": sorted([*crate.attachments, "ro-crate-metadata.json"]),
        "document": document_from_crate(read_crate_zip(zip_bytes)),
        "main_path": "workflow.cwl",
    }

    target = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "cases.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(out, indent=2, ensure_ascii=False), encoding="utf-8")
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
