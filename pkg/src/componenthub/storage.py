"""Embedded key-value storage port.

The registry persists everything (records, version snapshots, counters,
attachments, sync state) as opaque byte values under path-like keys. Two
backends ship: an in-memory dict for tests and ephemeral instances, and a
SQLite file for single-binary deployment. ``put_many`` is the only write
entry point and is atomic: either every key in the batch lands or none do.
"""

from __future__ import annotations

import sqlite3
import threading
from pathlib import Path
from typing import Iterator, Protocol

from .errors import StorageUnavailable


class StoragePort(Protocol):
    def get(self, key: str) -> bytes | None: ...

    def put_many(self, items: dict[str, bytes | None]) -> None:
        """Atomically apply a batch; a ``None`` value deletes the key."""

    def scan(self, prefix: str) -> Iterator[tuple[str, bytes]]:
        """All (key, value) pairs under a prefix, in key order."""

    def close(self) -> None: ...


class MemoryStorage:
    def __init__(self):
        self._data: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> bytes | None:
        with self._lock:
            return self._data.get(key)

    def put_many(self, items: dict[str, bytes | None]) -> None:
        with self._lock:
            for key, value in items.items():
                if value is None:
                    self._data.pop(key, None)
                else:
                    self._data[key] = value

    def scan(self, prefix: str) -> Iterator[tuple[str, bytes]]:
        with self._lock:
            snapshot = [(k, v) for k, v in self._data.items() if k.startswith(prefix)]
        return iter(sorted(snapshot))

    def close(self) -> None:
        pass


class SqliteStorage:
    """Single-file transactional backend.

    One connection guarded by a lock keeps writes serialized; batches commit
    in a single transaction so a crash mid-update leaves no partial state.
    """

    def __init__(self, path: str | Path):
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._conn = sqlite3.connect(str(path), check_same_thread=False)
        except (OSError, sqlite3.Error) as exc:
            raise StorageUnavailable(f"cannot open storage at {path}: {exc}") from exc
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS kv (key TEXT PRIMARY KEY, value BLOB NOT NULL)"
            )
            self._conn.commit()

    def get(self, key: str) -> bytes | None:
        with self._lock:
            row = self._conn.execute("SELECT value FROM kv WHERE key = ?", (key,)).fetchone()
        return bytes(row[0]) if row else None

    def put_many(self, items: dict[str, bytes | None]) -> None:
        with self._lock:
            try:
                for key, value in items.items():
                    if value is None:
                        self._conn.execute("DELETE FROM kv WHERE key = ?", (key,))
                    else:
                        self._conn.execute(
                            "INSERT INTO kv (key, value) VALUES (?, ?) "
                            "ON CONFLICT(key) DO UPDATE SET value = excluded.value",
                            (key, value),
                        )
                self._conn.commit()
            except sqlite3.Error:
                self._conn.rollback()
                raise

    def scan(self, prefix: str) -> Iterator[tuple[str, bytes]]:
        # '￿' sorts after any printable key suffix
        with self._lock:
            rows = self._conn.execute(
                "SELECT key, value FROM kv WHERE key >= ? AND key < ? ORDER BY key",
                (prefix, prefix + "￿"),
            ).fetchall()
        return iter([(row[0], bytes(row[1])) for row in rows])

    def close(self) -> None:
        with self._lock:
            self._conn.close()


def open_storage(path: str | None) -> StoragePort:
    """Storage factory: ``None``/``:memory:`` for ephemeral, else a SQLite file."""
    if path is None or path == ":memory:":
        return MemoryStorage()
    return SqliteStorage(path)
