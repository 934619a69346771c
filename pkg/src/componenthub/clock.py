"""Injectable clock with second-precision UTC timestamps.

Every timestamp the registry persists goes through one of these clocks, so
tests can freeze and advance time deterministically (embargo release, token
expiry, poll scheduling).
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Protocol

ISO_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def to_iso(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(ISO_FORMAT)


def from_iso(text: str) -> datetime:
    return datetime.strptime(text, ISO_FORMAT).replace(tzinfo=timezone.utc)


class Clock(Protocol):
    def now(self) -> datetime: ...


class RealClock:
    """Wall clock truncated to whole seconds."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc).replace(microsecond=0)


class FixedClock:
    """Frozen clock for tests; advance explicitly."""

    def __init__(self, start: datetime | str = "2026-01-01T00:00:00Z"):
        if isinstance(start, str):
            start = from_iso(start)
        self._now = start.astimezone(timezone.utc).replace(microsecond=0)

    def now(self) -> datetime:
        return self._now

    def advance(self, seconds: float = 0, days: float = 0) -> datetime:
        self._now += timedelta(seconds=seconds, days=days)
        return self._now

    def set(self, ts: datetime | str) -> None:
        if isinstance(ts, str):
            ts = from_iso(ts)
        self._now = ts.astimezone(timezone.utc).replace(microsecond=0)
