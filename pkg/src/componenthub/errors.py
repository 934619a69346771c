"""Domain error hierarchy shared by every module."""

from __future__ import annotations


class ComponentHubError(Exception):
    """Base class for all registry domain errors."""


class NamespaceMismatch(ComponentHubError):
    pass


class CounterExhausted(ComponentHubError):
    pass


class InvalidDocument(ComponentHubError):
    """Raised when a metadata document fails validation.

    Carries the ValidationReport so callers can surface the exact issues.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class InvalidCrate(ComponentHubError):
    """Raised on crate import when the crate fails profile validation."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NotFound(ComponentHubError):
    pass


class VersionNotFound(ComponentHubError):
    pass


class Tombstoned(ComponentHubError):
    """Operation not permitted on a tombstoned record."""


class AlreadyTombstoned(ComponentHubError):
    pass


class Unauthorized(ComponentHubError):
    """Denied by access policy; ``reason`` is a machine-readable code."""

    def __init__(self, message: str, reason: str = "denied"):
        super().__init__(message)
        self.reason = reason


class TokenInvalid(ComponentHubError):
    pass


class TokenExpired(ComponentHubError):
    pass


class PastTimestamp(ComponentHubError):
    pass


class MalformedQuery(ComponentHubError):
    pass


class SourceUnreachable(ComponentHubError):
    pass


class StorageFailure(ComponentHubError):
    pass


class UnsupportedDialect(ComponentHubError):
    pass


class ParseFailure(ComponentHubError):
    """Workflow file could not be parsed; ``location`` points at the culprit."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(message)
        self.location = location


class CyclicWorkflow(ComponentHubError):
    pass


class RemoteUnreachable(ComponentHubError):
    pass


class PartialFailure(ComponentHubError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SandboxUnavailable(ComponentHubError):
    pass


class ConfigInvalid(ComponentHubError):
    pass


class StorageUnavailable(ComponentHubError):
    pass
