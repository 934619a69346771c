"""Drift detection, artifact verification, viability checks."""

from __future__ import annotations

import hashlib
import random

import pytest

from componenthub.documents import SourceDescriptor, compute_checksum
from componenthub.errors import NotFound, SandboxUnavailable
from componenthub.watchers import (
    DRIFTED,
    FakeFetcher,
    FakeRunner,
    UNCHANGED,
    UNREACHABLE,
    WatchSource,
)

from conftest import ALICE, make_document, make_policy, make_service


@pytest.fixture
def watched():
    """Service with one registered record whose source the tests can mutate."""
    payload = b"#!/bin/sh\necho align\n"
    fetcher = FakeFetcher({"tools/align.sh": payload})
    runner = FakeRunner(exit_codes={"true": 0, "false": 1, "sleepy": -1})
    service = make_service(fetcher=fetcher, runner=runner)
    source = SourceDescriptor(
        scheme="file", locator="tools/align.sh", checksum=compute_checksum(payload)
    )
    record = service.register(make_document(), [source], make_policy(), ALICE)
    ws = service.watch(record.pid.rendered)
    yield service, fetcher, record.pid.rendered, ws
    service.close()


def test_unchanged_artifact(watched):
    service, fetcher, pid, ws = watched
    events = service.watcher.poll_source(ws)
    assert [e.kind for e in events] == [UNCHANGED]
    assert service.resolve(pid, ALICE)["status"] == "active"


def test_drift_marks_record_stale(watched):
    service, fetcher, pid, ws = watched
    fetcher.contents["tools/align.sh"] = b"#!/bin/sh\necho tampered\n"
    events = service.watcher.poll_source(ws)
    assert [e.kind for e in events] == [DRIFTED]
    view = service.resolve(pid, ALICE)
    assert view["status"] == "stale"
    assert view["verification"]["checksum_match"] is False
    # the observed digest is the mutated content's digest
    expected = hashlib.sha256(b"#!/bin/sh\necho tampered\n").hexdigest()
    assert events[0].observed_checksum.digest == expected


def test_unreachable_source_never_sets_stale(watched):
    service, fetcher, pid, ws = watched
    del fetcher.contents["tools/align.sh"]
    events = service.watcher.poll_source(ws)
    assert [e.kind for e in events] == [UNREACHABLE]
    assert service.resolve(pid, ALICE)["status"] == "active"


def test_randomized_polls_no_false_staleness(watched):
    service, fetcher, pid, ws = watched
    payload = fetcher.contents["tools/align.sh"]
    rng = random.Random(5)
    for _ in range(100):
        if rng.random() < 0.3:
            fetcher.contents.pop("tools/align.sh", None)
        else:
            fetcher.contents["tools/align.sh"] = payload
        service.watcher.poll_source(ws)
        assert service.resolve(pid, ALICE)["status"] == "active"


def test_poll_respects_interval_unless_forced(watched, clock=None):
    service, fetcher, pid, ws = watched
    service.watcher.poll_source(ws)  # sets last_polled
    assert service.watcher.poll_source(ws, force=False) == []
    service.clock.advance(seconds=ws.poll_interval + 1)
    assert service.watcher.poll_source(ws, force=False) != []


def test_force_poll_all_detects_drift_in_one_cycle(watched):
    service, fetcher, pid, ws = watched
    fetcher.contents["tools/align.sh"] = b"mutated"
    events = service.force_poll()
    assert [e.kind for e in events[pid]] == [DRIFTED]
    assert service.resolve(pid, ALICE)["status"] == "stale"


def test_verify_intact_artifact(watched):
    service, fetcher, pid, ws = watched
    result = service.verify_artifact(pid)
    assert result["reachable"] is True
    assert result["checksum_match"] is True
    assert service.resolve(pid, ALICE)["verification"] == result


def test_verify_moved_artifact(watched):
    service, fetcher, pid, ws = watched
    del fetcher.contents["tools/align.sh"]
    result = service.verify_artifact(pid)
    assert result["reachable"] is False


def test_verify_altered_artifact(watched):
    service, fetcher, pid, ws = watched
    fetcher.contents["tools/align.sh"] = b"altered bytes"
    result = service.verify_artifact(pid)
    assert result["reachable"] is True
    assert result["checksum_match"] is False


def test_verify_unknown_pid(watched):
    service, *_ = watched
    with pytest.raises(NotFound):
        service.verify_artifact("olcf:wf-99999999")


def test_viability_pass(watched):
    service, fetcher, pid, ws = watched
    service.update(pid, ALICE, {"x_check_command": "true"})
    result = service.run_viability_check(pid)
    assert result["verdict"] == "viable"
    assert service.resolve(pid, ALICE)["status"] == "active"


def test_viability_broken_sets_stale(watched):
    service, fetcher, pid, ws = watched
    service.update(pid, ALICE, {"x_check_command": "false"})
    result = service.run_viability_check(pid)
    assert result["verdict"] == "broken"
    assert result["exit_status"] == 1
    assert service.resolve(pid, ALICE)["status"] == "stale"


def test_viability_skipped_without_command(watched):
    service, fetcher, pid, ws = watched
    result = service.run_viability_check(pid)
    assert result["verdict"] == "skipped"
    assert service.resolve(pid, ALICE)["status"] == "active"


def test_viability_timeout_is_broken(watched):
    service, fetcher, pid, ws = watched
    service.update(pid, ALICE, {"x_check_command": "sleepy"})
    result = service.run_viability_check(pid)
    assert result["verdict"] == "broken"


def test_viability_without_runner():
    service = make_service(runner=None)
    service.runner = None
    record = service.register(
        make_document(x_check_command="true"),
        [SourceDescriptor(scheme="git", locator="https://git.example.org/x")],
        make_policy(),
        ALICE,
    )
    from componenthub.watchers import run_viability_check

    with pytest.raises(SandboxUnavailable):
        run_viability_check(service.store, record.pid.rendered, None, service.clock)
    service.close()


def test_watch_state_round_trips():
    payload = b"content"
    fetcher = FakeFetcher({"a/b": payload})
    service = make_service(fetcher=fetcher)
    record = service.register(
        make_document(),
        [SourceDescriptor(scheme="file", locator="a/b")],
        make_policy(),
        ALICE,
    )
    service.watch(record.pid.rendered, poll_interval=60)
    watches = service.watcher.list_watches()
    assert len(watches) == 1
    index, ws = watches[0]
    assert ws.pid == record.pid.rendered
    assert ws.poll_interval == 60
    with pytest.raises(ValueError):
        WatchSource(pid=ws.pid, source=ws.source, poll_interval=5)
    service.close()
