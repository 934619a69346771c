"""Service configuration: one YAML file plus COMPONENTHUB_* overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigInvalid
from .federation import RemoteRegistry
from .ids import is_valid_namespace

ENV_PREFIX = "COMPONENTHUB_"

DEFAULT_ATTACHMENT_LIMIT = 64 * 1024 * 1024  # bytes; larger files stored by reference


@dataclass
class ServiceConfig:
    namespace: str = "olcf"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8404
    storage_path: str | None = None  # None -> in-memory
    token_secret: str = "insecure-dev-secret"
    remotes: list[RemoteRegistry] = field(default_factory=list)
    default_poll_interval: int = 900
    sandbox_workers: int = 2
    viability_timeout: float = 300.0
    eager_verification: bool = False
    clock_start: str | None = None  # ISO timestamp -> fixed clock (tests)
    ui_path: str | None = None
    attachment_limit: int = DEFAULT_ATTACHMENT_LIMIT
    enable_watch_loop: bool = False
    sync_interval: int = 0  # seconds between scheduled pulls; 0 disables

    def validate(self) -> None:
        if not is_valid_namespace(self.namespace):
            raise ConfigInvalid(f"namespace {self.namespace!r} violates the PID grammar")
        if not 0 <= self.listen_port < 65536:  # 0 binds an ephemeral port
            raise ConfigInvalid(f"listen_port {self.listen_port} out of range")
        for remote in self.remotes:
            if remote.namespace == self.namespace:
                raise ConfigInvalid(
                    f"remote {remote.name!r} shares the local namespace {self.namespace!r}"
                )

    def remote(self, name: str) -> RemoteRegistry | None:
        for remote in self.remotes:
            if remote.name == name:
                return remote
        return None


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
    """Build config from an optional YAML file, then apply env overrides.

    Environment variables use the config key uppercased under the
    ``COMPONENTHUB_`` prefix, e.g. ``COMPONENTHUB_NAMESPACE=eosc``.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        loaded = yaml.safe_load(text) or {}
        if not isinstance(loaded, dict):
            raise ConfigInvalid("config file must hold a mapping")
        data = loaded

    file_keys = set(data)
    env = dict(os.environ if env is None else env)
    config_fields = set(ServiceConfig.__dataclass_fields__)
    for key, value in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX) :].lower()
        # CONFIG/TOKEN and friends belong to the CLI, not the service config
        if name in config_fields:
            data[name] = value

    remotes = [
        remote if isinstance(remote, RemoteRegistry) else RemoteRegistry.from_json(remote)
        for remote in data.pop("remotes", []) or []
    ]

    config = ServiceConfig(remotes=remotes)
    for key, value in data.items():
        if not hasattr(config, key):
            if key in file_keys:
                raise ConfigInvalid(f"unknown config key {key!r}")
            continue
        current = getattr(config, key)
        if isinstance(current, bool):
            value = str(value).lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int) and not isinstance(current, bool):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(config, key, value)
    config.validate()
    return config
