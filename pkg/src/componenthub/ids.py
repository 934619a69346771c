"""Persistent identifiers and the component-kind taxonomy.

A PID renders as ``<namespace>:<kind_tag>-<serial>`` where the namespace is
the registry instance name, the tag is a fixed 2-letter code per component
kind, and the serial is a zero-padded 8-digit counter. Once minted a PID is
never reissued or deleted, even after tombstoning.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from enum import Enum

from .errors import CounterExhausted, NamespaceMismatch

PID_PATTERN = re.compile(r"^[a-z][a-z0-9]{0,15}:(wf|cd|ct|ds|ml|sv)-[0-9]{8}$")
NAMESPACE_PATTERN = re.compile(r"^[a-z][a-z0-9]{0,15}$")

MAX_SERIAL = 99_999_999


class ComponentKind(str, Enum):
    WORKFLOW = "workflow"
    CODE = "code"
    CONTAINER = "container"
    DATASET = "dataset"
    MODEL = "model"
    SERVICE = "service"

    @property
    def tag(self) -> str:
        return _KIND_TAGS[self]

    @classmethod
    def from_tag(cls, tag: str) -> "ComponentKind":
        return _TAG_KINDS[tag]

    @classmethod
    def parse(cls, value: str) -> "ComponentKind":
        value = value.strip().lower()
        if value in _TAG_KINDS:
            return _TAG_KINDS[value]
        return cls(value)


_KIND_TAGS = {
    ComponentKind.WORKFLOW: "wf",
    ComponentKind.CODE: "cd",
    ComponentKind.CONTAINER: "ct",
    ComponentKind.DATASET: "ds",
    ComponentKind.MODEL: "ml",
    ComponentKind.SERVICE: "sv",
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


@dataclass(frozen=True, order=True)
class PersistentIdentifier:
    namespace: str
    kind: ComponentKind
    serial: int

    @property
    def rendered(self) -> str:
        return f"{self.namespace}:{self.kind.tag}-{self.serial:08d}"

    def __str__(self) -> str:
        return self.rendered

    @classmethod
    def parse(cls, text: str) -> "PersistentIdentifier":
        if not PID_PATTERN.match(text):
            raise ValueError(f"not a valid PID: {text!r}")
        namespace, rest = text.split(":", 1)
        tag, serial = rest.split("-", 1)
        return cls(namespace=namespace, kind=ComponentKind.from_tag(tag), serial=int(serial))


def is_valid_pid(text: str) -> bool:
    return bool(PID_PATTERN.match(text))


def is_valid_namespace(text: str) -> bool:
    return bool(NAMESPACE_PATTERN.match(text))


class PidMinter:
    """Serialized, durable counter per (namespace, kind).

    The counter state lives in the storage port under ``counter/`` keys and
    is committed before the new PID is returned, so a crash after mint never
    reissues a serial.
    """

    def __init__(self, storage, namespace: str):
        if not is_valid_namespace(namespace):
            raise NamespaceMismatch(f"invalid instance namespace {namespace!r}")
        self._storage = storage
        self._namespace = namespace
        self._lock = threading.Lock()

    @property
    def namespace(self) -> str:
        return self._namespace

    def mint(self, namespace: str, kind: ComponentKind) -> PersistentIdentifier:
        if namespace != self._namespace:
            raise NamespaceMismatch(
                f"instance is configured as {self._namespace!r}, cannot mint in {namespace!r}"
            )
        key = f"counter/{namespace}/{kind.tag}"
        with self._lock:
            raw = self._storage.get(key)
            serial = (int(raw.decode("ascii")) if raw is not None else 0) + 1
            if serial > MAX_SERIAL:
                raise CounterExhausted(f"serial space exhausted for {namespace}:{kind.tag}")
            self._storage.put_many({key: str(serial).encode("ascii")})
        return PersistentIdentifier(namespace=namespace, kind=kind, serial=serial)
