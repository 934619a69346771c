"""CLI subcommands and their parity with direct service calls."""

from __future__ import annotations

import json
from datetime import timedelta

import pytest
import yaml

from componenthub.access import TokenVerifier
from componenthub.clock import FixedClock
from componenthub.cli import main
from componenthub.config import load_config
from componenthub.crates import write_crate_zip
from componenthub.service import RegistryService

from conftest import ALICE, CARA, make_crate, make_document


@pytest.fixture
def env(tmp_path, monkeypatch):
    """A config file with durable storage plus tokens for the fixtures' users."""
    config_path = tmp_path / "config.yaml"
    config_path.write_text(
        yaml.safe_dump(
            {
                "namespace": "olcf",
                "storage_path": str(tmp_path / "registry.db"),
                "token_secret": "cli-test-secret",
                "clock_start": "2026-06-01T00:00:00Z",
            }
        )
    )
    clock = FixedClock("2026-06-01T00:00:00Z")
    verifier = TokenVerifier(secret=b"cli-test-secret", clock=clock)
    tokens = {
        "alice": verifier.issue(ALICE, clock.now() + timedelta(days=365)),
        "cara": verifier.issue(CARA, clock.now() + timedelta(days=365)),
    }
    monkeypatch.setenv("COMPONENTHUB_CONFIG", str(config_path))
    monkeypatch.setenv("COMPONENTHUB_TOKEN", tokens["alice"])
    return {"config": str(config_path), "tmp": tmp_path, "tokens": tokens}


def invoke(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def service_for(env) -> RegistryService:
    return RegistryService(load_config(env["config"]))


def test_register_crate_prints_pid(env, capsys, tmp_path):
    crate_file = tmp_path / "pkg.crate.zip"
    crate_file.write_bytes(write_crate_zip(make_crate()))
    code, out, err = invoke(capsys, "register", "--crate", str(crate_file), "--visibility", "public")
    assert code == 0
    assert out.strip() == "olcf:wf-00000001"


def test_resolve_unknown_exits_one(env, capsys):
    code, out, err = invoke(capsys, "resolve", "olcf:wf-99999999")
    assert code == 1
    assert "no record" in err


def test_usage_error_exits_two(env, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["definitely-not-a-command"])
    assert exc.value.code == 2


def test_register_document_then_resolve_and_search(env, capsys, tmp_path):
    doc_file = tmp_path / "doc.json"
    doc_file.write_text(json.dumps(make_document(name="cli-made")))
    code, out, _ = invoke(
        capsys,
        "register",
        "--document",
        str(doc_file),
        "--source",
        "git:https://git.example.org/lab/align#v1",
    )
    assert code == 0
    pid = out.strip()

    code, out, _ = invoke(capsys, "resolve", pid, "--json")
    assert code == 0
    view = json.loads(out)
    assert view["document"]["name"] == "cli-made"
    assert view["sources"][0]["ref"] == "v1"

    code, out, _ = invoke(capsys, "search", "--text", "cli-made", "--json")
    assert json.loads(out)["total"] == 1


def test_update_tombstone_flow(env, capsys, tmp_path):
    doc_file = tmp_path / "doc.json"
    doc_file.write_text(json.dumps(make_document()))
    _, out, _ = invoke(capsys, "register", "--document", str(doc_file),
                       "--source", "git:https://git.example.org/lab/align")
    pid = out.strip()

    code, out, _ = invoke(capsys, "update", pid, "--set-json", 'keywords=["a","b"]')
    assert code == 0 and "v2" in out

    code, out, _ = invoke(capsys, "tombstone", pid, "--reason", "superseded")
    assert code == 0 and "final version 2" in out

    code, out, _ = invoke(capsys, "resolve", pid, "--json")
    assert json.loads(out)["tombstone"]["reason"] == "superseded"


def test_assess_json_matches_direct_call(env, capsys, tmp_path):
    crate_file = tmp_path / "pkg.crate.zip"
    crate_file.write_bytes(write_crate_zip(make_crate()))
    _, out, _ = invoke(capsys, "register", "--crate", str(crate_file))
    pid = out.strip()

    code, out, _ = invoke(capsys, "assess", pid, "--json")
    assert code == 0
    cli_report = json.loads(out)

    service = service_for(env)
    direct = service.assess(pid, ALICE).to_json()
    service.close()
    assert cli_report == direct


def test_export_crate_roundtrip(env, capsys, tmp_path):
    crate_file = tmp_path / "pkg.crate.zip"
    crate_file.write_bytes(write_crate_zip(make_crate()))
    _, out, _ = invoke(capsys, "register", "--crate", str(crate_file))
    pid = out.strip()

    out_file = tmp_path / "exported.zip"
    code, out, _ = invoke(capsys, "export-crate", pid, "-o", str(out_file))
    assert code == 0
    assert out_file.stat().st_size > 0


def test_machine_subcommands(env, capsys, monkeypatch):
    monkeypatch.setenv("COMPONENTHUB_TOKEN", env["tokens"]["cara"])
    code, out, _ = invoke(
        capsys,
        "machine",
        "register",
        "--name",
        "Frontier-like",
        "--commissioned",
        "2022-01-01",
        "--decommission-planned",
        "2027-01-01",
    )
    assert code == 0
    pid = out.strip()
    code, out, _ = invoke(capsys, "machine", "list")
    assert pid in out


def test_embargo_command(env, capsys, tmp_path):
    doc_file = tmp_path / "doc.json"
    doc_file.write_text(json.dumps(make_document()))
    _, out, _ = invoke(capsys, "register", "--document", str(doc_file),
                       "--source", "git:https://git.example.org/lab/a")
    pid = out.strip()
    code, out, _ = invoke(capsys, "embargo", pid, "--until", "2026-07-01T00:00:00Z")
    assert code == 0
    code, out, _ = invoke(capsys, "resolve", pid, "--json")
    assert json.loads(out)["policy"]["embargo_until"] == "2026-07-01T00:00:00Z"


def test_provenance_ingest_from_file(env, capsys, tmp_path):
    doc_file = tmp_path / "doc.json"
    doc_file.write_text(json.dumps(make_document()))
    _, out, _ = invoke(capsys, "register", "--document", str(doc_file),
                       "--source", "git:https://git.example.org/lab/a")
    pid = out.strip()
    events = tmp_path / "events.ndjson"
    events.write_text(
        "\n".join(
            [
                json.dumps({"run_id": "r1", "type": "start", "workflow": pid,
                            "timestamp": "2026-06-01T01:00:00Z"}),
                json.dumps({"run_id": "r1", "type": "end", "status": "succeeded",
                            "timestamp": "2026-06-01T02:00:00Z"}),
            ]
        )
    )
    code, out, _ = invoke(capsys, "provenance-ingest", str(events))
    assert code == 0
    assert "1 run(s)" in out


def test_cli_effect_equals_api_effect(env, capsys, tmp_path):
    """The CLI-registered record and an API-registered twin canonicalize identically."""
    from componenthub.documents import canonicalize_document

    doc_file = tmp_path / "doc.json"
    doc = make_document(name="parity-check")
    doc_file.write_text(json.dumps(doc))
    _, out, _ = invoke(capsys, "register", "--document", str(doc_file),
                       "--source", "git:https://git.example.org/lab/parity")
    cli_pid = out.strip()

    service = service_for(env)
    cli_doc = service.store.get_record(cli_pid).document
    assert canonicalize_document(cli_doc) == canonicalize_document(doc)
    service.close()
