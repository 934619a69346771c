"""Repository watchers: drift detection, artifact verification, viability checks.

Watching is poll-based. Each watch fetches the source's current bytes (or a
scheme-native version probe), hashes them, and compares against the last
observation. Drift marks the record stale; an unreachable source is an
event, never a status change, so outages cannot masquerade as drift.
"""

from __future__ import annotations

import logging
import subprocess
import threading
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Protocol

from .clock import Clock, from_iso, to_iso
from .documents import Checksum, SourceDescriptor, compute_checksum, canonical_json_bytes
from .errors import NotFound, SandboxUnavailable
from .store import RecordStore, STALE

logger = logging.getLogger("componenthub.watchers")

DEFAULT_POLL_INTERVAL = 900
MIN_POLL_INTERVAL = 30
DEFAULT_VIABILITY_TIMEOUT = 300

UNCHANGED = "unchanged"
DRIFTED = "drifted"
UNREACHABLE = "unreachable"

CHECK_COMMAND_PROPERTY = "x_check_command"


class FetchError(Exception):
    pass


class ArtifactFetcher(Protocol):
    def fetch(self, source: SourceDescriptor) -> bytes:
        """Return the artifact bytes; raise FetchError when unreachable."""


class LocalFetcher:
    """Reads file-scheme sources from the filesystem or internal storage."""

    def __init__(self, storage=None, attachment_prefix: str = "attach/"):
        self._storage = storage
        self._prefix = attachment_prefix

    def fetch(self, source: SourceDescriptor) -> bytes:
        if source.scheme != "file":
            raise FetchError(f"no fetcher for scheme {source.scheme!r}")
        if self._storage is not None:
            raw = self._storage.get(f"{self._prefix}{source.locator}")
            if raw is not None:
                return raw
        path = Path(source.locator)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise FetchError(f"cannot read {source.locator}: {exc}") from exc


class FakeFetcher:
    """Test double: a mutable map of locator to bytes (or an exception)."""

    def __init__(self, contents: dict[str, bytes] | None = None):
        self.contents: dict[str, bytes] = dict(contents or {})

    def fetch(self, source: SourceDescriptor) -> bytes:
        if source.locator not in self.contents:
            raise FetchError(f"{source.locator} is gone")
        value = self.contents[source.locator]
        if isinstance(value, Exception):
            raise FetchError(str(value))
        return value


@dataclass
class WatchSource:
    pid: str
    source: SourceDescriptor
    poll_interval: int = DEFAULT_POLL_INTERVAL
    last_polled: datetime | None = None
    last_observed_checksum: Checksum | None = None

    def __post_init__(self):
        if self.poll_interval < MIN_POLL_INTERVAL:
            raise ValueError(f"poll_interval must be >= {MIN_POLL_INTERVAL}s")

    def to_json(self) -> dict[str, Any]:
        return {
            "pid": self.pid,
            "source": self.source.to_json(),
            "poll_interval": self.poll_interval,
            "last_polled": to_iso(self.last_polled) if self.last_polled else None,
            "last_observed_checksum": (
                self.last_observed_checksum.to_json() if self.last_observed_checksum else None
            ),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "WatchSource":
        checksum = data.get("last_observed_checksum")
        return cls(
            pid=data["pid"],
            source=SourceDescriptor.from_json(data["source"]),
            poll_interval=data.get("poll_interval", DEFAULT_POLL_INTERVAL),
            last_polled=from_iso(data["last_polled"]) if data.get("last_polled") else None,
            last_observed_checksum=Checksum.from_json(checksum) if checksum else None,
        )


@dataclass(frozen=True)
class ChangeEvent:
    kind: str  # unchanged | drifted | unreachable
    observed_checksum: Checksum | None = None
    detail: str = ""


class Watcher:
    """Drift detection and verification against a record store."""

    def __init__(self, store: RecordStore, fetcher: ArtifactFetcher, clock: Clock):
        self._store = store
        self._fetcher = fetcher
        self._clock = clock
        self._lock = threading.Lock()

    # -- watch bookkeeping ---------------------------------------------------

    def watch(self, pid: str, source_index: int = 0, poll_interval: int = DEFAULT_POLL_INTERVAL) -> WatchSource:
        record = self._store.get_record(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        source = record.sources[source_index]
        ws = WatchSource(pid=pid, source=source, poll_interval=poll_interval)
        self._save(ws, source_index)
        return ws

    def _save(self, ws: WatchSource, source_index: int) -> None:
        key = f"watch/{ws.pid}/{source_index}"
        self._store.storage.put_many({key: canonical_json_bytes(ws.to_json())})

    def list_watches(self) -> list[tuple[int, WatchSource]]:
        watches = []
        for key, raw in self._store.storage.scan("watch/"):
            index = int(key.rsplit("/", 1)[1])
            watches.append((index, WatchSource.from_json(_loads(raw))))
        return watches

    # -- operations ------------------------------------------------------------

    def poll_source(self, ws: WatchSource, source_index: int = 0, *, force: bool = True) -> list[ChangeEvent]:
        """One poll cycle for a watched source.

        Drift (observed bytes differ from the last observation) marks the
        record stale and records a verification result with the mismatching
        checksum. Unreachable sources leave status untouched.
        """
        now = self._clock.now()
        if not force and ws.last_polled is not None:
            due = (now - ws.last_polled).total_seconds() >= ws.poll_interval
            if not due:
                return []
        try:
            data = self._fetcher.fetch(ws.source)
        except FetchError as exc:
            ws.last_polled = now
            self._save(ws, source_index)
            return [ChangeEvent(kind=UNREACHABLE, detail=str(exc))]

        observed = compute_checksum(data)
        previous = ws.last_observed_checksum or ws.source.checksum
        ws.last_polled = now
        ws.last_observed_checksum = observed
        self._save(ws, source_index)

        if previous is None or observed.digest == previous.digest:
            return [ChangeEvent(kind=UNCHANGED, observed_checksum=observed)]

        stored = ws.source.checksum
        verification = {
            "checked_at": to_iso(now),
            "reachable": True,
            "checksum_match": (observed.digest == stored.digest) if stored else False,
            "detail": f"drift detected on {ws.source.locator}",
        }
        self._store.set_verification(ws.pid, verification)
        self._store.set_status(ws.pid, STALE)
        logger.info("drift detected for %s (%s)", ws.pid, ws.source.locator)
        return [ChangeEvent(kind=DRIFTED, observed_checksum=observed)]

    def verify_artifact(self, pid: str) -> dict[str, Any]:
        """On-demand reachability plus checksum comparison for every source.

        Stores the result on the record; never changes status by itself.
        """
        record = self._store.get_record(pid)
        if record is None:
            raise NotFound(f"no record for {pid}")
        now = self._clock.now()
        reachable = True
        matches: list[bool] = []
        details: list[str] = []
        for source in record.sources:
            try:
                data = self._fetcher.fetch(source)
            except FetchError as exc:
                reachable = False
                details.append(f"{source.locator}: unreachable ({exc})")
                continue
            if source.checksum is not None:
                ok = compute_checksum(data).digest == source.checksum.digest
                matches.append(ok)
                details.append(f"{source.locator}: checksum {'match' if ok else 'MISMATCH'}")
            else:
                details.append(f"{source.locator}: reachable, no stored checksum")
        result = {
            "checked_at": to_iso(now),
            "reachable": reachable,
            "checksum_match": (all(matches) if (reachable and matches) else None),
            "detail": "; ".join(details),
        }
        self._store.set_verification(pid, result)
        return result


# ---------------------------------------------------------------------------
# Viability checks
# ---------------------------------------------------------------------------


class CommandRunner(Protocol):
    def run(self, command: str, timeout: float) -> tuple[int, float]:
        """Execute and return (exit_status, wall_seconds)."""


class SubprocessRunner:
    """Runs check commands under a scrubbed environment with a wall cap.

    Network isolation is the deployment sandbox's job; this runner enforces
    the timeout and a minimal environment.
    """

    def run(self, command: str, timeout: float) -> tuple[int, float]:
        started = time.monotonic()
        try:
            proc = subprocess.run(
                ["/bin/sh", "-c", command],
                timeout=timeout,
                capture_output=True,
                env={"PATH": "/usr/bin:/bin"},
            )
            return proc.returncode, time.monotonic() - started
        except subprocess.TimeoutExpired:
            return -1, time.monotonic() - started


class FakeRunner:
    """Test double mapping commands to fixed exit codes."""

    def __init__(self, exit_codes: dict[str, int] | None = None, default: int = 0):
        self.exit_codes = dict(exit_codes or {})
        self.default = default
        self.calls: list[str] = []

    def run(self, command: str, timeout: float) -> tuple[int, float]:
        self.calls.append(command)
        return self.exit_codes.get(command, self.default), 0.01


def run_viability_check(
    store: RecordStore,
    pid: str,
    runner: CommandRunner | None,
    clock: Clock,
    *,
    timeout: float = DEFAULT_VIABILITY_TIMEOUT,
) -> dict[str, Any]:
    """Execute the record's opt-in check command in the injected sandbox.

    No command configured means verdict skipped and an untouched record; a
    broken verdict (non-zero exit or timeout) marks the record stale.
    """
    record = store.get_record(pid)
    if record is None:
        raise NotFound(f"no record for {pid}")
    command = record.document.get(CHECK_COMMAND_PROPERTY)
    checked_at = to_iso(clock.now())
    if not command:
        return {
            "checked_at": checked_at,
            "command": "",
            "exit_status": 0,
            "duration": 0.0,
            "verdict": "skipped",
        }
    if runner is None:
        raise SandboxUnavailable("no command runner configured")
    exit_status, duration = runner.run(str(command), timeout)
    verdict = "viable" if exit_status == 0 else "broken"
    result = {
        "checked_at": checked_at,
        "command": str(command),
        "exit_status": exit_status,
        "duration": duration,
        "verdict": verdict,
    }
    if exit_status == -1:
        result["detail"] = f"timed out after {timeout:.0f}s"
    if verdict == "broken":
        store.set_status(pid, STALE)
    return result


class WatchScheduler:
    """Background polling loop; tests call force_poll_all() synchronously."""

    def __init__(self, watcher: Watcher, interval_floor: float = 1.0):
        self._watcher = watcher
        self._interval_floor = interval_floor
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def force_poll_all(self) -> dict[str, list[ChangeEvent]]:
        events: dict[str, list[ChangeEvent]] = {}
        for index, ws in self._watcher.list_watches():
            events.setdefault(ws.pid, []).extend(
                self._watcher.poll_source(ws, index, force=True)
            )
        return events

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, daemon=True, name="componenthub-watch")
        self._thread.start()

    def _loop(self) -> None:
        while not self._stop.wait(self._interval_floor):
            for index, ws in self._watcher.list_watches():
                if self._stop.is_set():
                    return
                try:
                    self._watcher.poll_source(ws, index, force=False)
                except Exception:  # watcher loop must survive bad sources
                    logger.exception("poll failed for %s", ws.pid)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None


def _loads(raw: bytes) -> Any:
    import json

    return json.loads(raw.decode("utf-8"))
