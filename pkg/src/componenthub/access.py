"""Authentication tokens, enclave-scoped authorization, visibility redaction.

Enclaves are hard boundaries: no role, however high, crosses one. The only
information that legitimately escapes an enclave is a public record's full
view or a listed record's existence stub. Embargoes narrow the effective
visibility until their deadline passes, after which the declared visibility
applies again with no further write.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Any

from .clock import Clock, from_iso, to_iso
from .errors import TokenExpired, TokenInvalid

ROLES = ("reader", "contributor", "curator", "admin")
_ROLE_RANK = {role: rank for rank, role in enumerate(ROLES)}

VISIBILITY_MODES = ("public", "listed", "hidden")

READ = "read"
REGISTER = "register"
UPDATE = "update"
TOMBSTONE = "tombstone"
SYNC = "sync"
ASSESS = "assess"
ACTIONS = (READ, REGISTER, UPDATE, TOMBSTONE, SYNC, ASSESS)


def role_rank(role: str) -> int:
    return _ROLE_RANK[role]


@dataclass(frozen=True)
class Principal:
    subject: str
    display_name: str = ""
    enclaves: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset({"reader"})
    issued_via: str = "local"

    def __post_init__(self):
        if not self.subject:
            raise ValueError("principal subject must be non-empty")

    @property
    def max_role(self) -> str:
        # admin implies curator implies contributor implies reader
        best = "reader"
        for role in self.roles:
            if _ROLE_RANK.get(role, -1) > _ROLE_RANK[best]:
                best = role
        return best

    def has_role(self, role: str) -> bool:
        return _ROLE_RANK[self.max_role] >= _ROLE_RANK[role]

    def member_of(self, enclave: str) -> bool:
        return enclave in self.enclaves


ANONYMOUS = Principal(subject="anonymous", display_name="Anonymous", issued_via="local")


@dataclass(frozen=True)
class AccessPolicy:
    enclave: str
    visibility: str = "public"
    embargo_until: datetime | None = None
    owners: frozenset[str] = frozenset()
    write_roles: str = "contributor"

    def __post_init__(self):
        if self.visibility not in VISIBILITY_MODES:
            raise ValueError(f"unknown visibility mode {self.visibility!r}")
        if self.write_roles not in ROLES:
            raise ValueError(f"unknown role {self.write_roles!r}")
        if not self.owners:
            raise ValueError("policy must name at least one owner")

    def effective_visibility(self, now: datetime) -> str:
        """Declared visibility, narrowed while an embargo is in force.

        An embargo never widens access: a public record is listed until the
        deadline, listed and hidden records keep their mode.
        """
        if self.embargo_until is not None and now < self.embargo_until:
            return "listed" if self.visibility == "public" else self.visibility
        return self.visibility

    def to_json(self) -> dict[str, Any]:
        return {
            "enclave": self.enclave,
            "visibility": self.visibility,
            "embargo_until": to_iso(self.embargo_until) if self.embargo_until else None,
            "owners": sorted(self.owners),
            "write_roles": self.write_roles,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AccessPolicy":
        embargo = data.get("embargo_until")
        return cls(
            enclave=data["enclave"],
            visibility=data.get("visibility", "public"),
            embargo_until=from_iso(embargo) if embargo else None,
            owners=frozenset(data.get("owners") or ()),
            write_roles=data.get("write_roles", "contributor"),
        )

    def with_embargo(self, until: datetime | None) -> "AccessPolicy":
        return replace(self, embargo_until=until)


@dataclass(frozen=True)
class Decision:
    allow: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.allow


def visibility_level(policy: AccessPolicy, principal: Principal, now: datetime) -> str:
    """How much of a record a principal may see: ``full``, ``stub`` or ``none``."""
    if principal.subject in policy.owners or principal.member_of(policy.enclave):
        return "full"
    effective = policy.effective_visibility(now)
    if effective == "public":
        return "full"
    if effective == "listed":
        return "stub"
    return "none"


def authorize(principal: Principal, action: str, policy: AccessPolicy, now: datetime) -> Decision:
    """Pure allow/deny decision from roles, enclaves, policy and clock."""
    if action not in ACTIONS:
        raise ValueError(f"unknown action {action!r}")

    if action == READ:
        if visibility_level(policy, principal, now) == "none":
            return Decision(False, "hidden")
        return Decision(True)

    if action == SYNC:
        if not principal.has_role("admin"):
            return Decision(False, "role-insufficient")
        return Decision(True)

    if action == ASSESS:
        level = visibility_level(policy, principal, now)
        if level == "full":
            return Decision(True)
        return Decision(False, "hidden" if level == "none" else "not-visible")

    if action == REGISTER:
        if not principal.has_role("contributor"):
            return Decision(False, "role-insufficient")
        if not principal.member_of(policy.enclave):
            return Decision(False, "enclave-mismatch")
        return Decision(True)

    if action == UPDATE:
        if not principal.member_of(policy.enclave):
            return Decision(False, "enclave-mismatch")
        if principal.subject in policy.owners:
            return Decision(True)
        if not principal.has_role(policy.write_roles):
            return Decision(False, "role-insufficient")
        return Decision(True)

    # tombstone: enclave members who own the record or hold curator rank
    if not principal.member_of(policy.enclave):
        return Decision(False, "enclave-mismatch")
    if principal.subject in policy.owners or principal.has_role("curator"):
        return Decision(True)
    return Decision(False, "role-insufficient")


def may_set_embargo(principal: Principal, policy: AccessPolicy) -> Decision:
    """Embargoes may be placed by owners or enclave curators."""
    if principal.subject in policy.owners and principal.member_of(policy.enclave):
        return Decision(True)
    if principal.member_of(policy.enclave) and principal.has_role("curator"):
        return Decision(True)
    if not principal.member_of(policy.enclave):
        return Decision(False, "enclave-mismatch")
    return Decision(False, "not-owner")


# ---------------------------------------------------------------------------
# Token handling. The reference verifier signs a JSON payload with HMAC-SHA256
# so tests can mint principals without any external identity provider; real
# deployments plug in their own verifier behind the same interface.
# ---------------------------------------------------------------------------

TOKEN_PREFIX = "cht_"


@dataclass
class TokenVerifier:
    secret: bytes
    clock: Clock = field(default=None)  # type: ignore[assignment]

    def issue(self, principal: Principal, expires_at: datetime) -> str:
        payload = {
            "sub": principal.subject,
            "name": principal.display_name,
            "enclaves": sorted(principal.enclaves),
            "roles": sorted(principal.roles),
            "via": principal.issued_via,
            "exp": to_iso(expires_at),
        }
        body = base64.urlsafe_b64encode(json.dumps(payload).encode("utf-8")).decode("ascii")
        sig = hmac.new(self.secret, body.encode("ascii"), hashlib.sha256).hexdigest()
        return f"{TOKEN_PREFIX}{body}.{sig}"

    def authenticate(self, token: str | None) -> Principal:
        """Resolve a bearer token to its principal.

        No token yields the distinguished anonymous reader. Bad signatures
        and malformed tokens raise TokenInvalid; good tokens past their
        expiry raise TokenExpired.
        """
        if token is None or token == "":
            return ANONYMOUS
        if not token.startswith(TOKEN_PREFIX) or "." not in token:
            raise TokenInvalid("malformed token")
        body, sig = token[len(TOKEN_PREFIX) :].rsplit(".", 1)
        expected = hmac.new(self.secret, body.encode("ascii"), hashlib.sha256).hexdigest()
        if not hmac.compare_digest(sig, expected):
            raise TokenInvalid("bad token signature")
        try:
            payload = json.loads(base64.urlsafe_b64decode(body.encode("ascii")))
        except (ValueError, UnicodeDecodeError) as exc:
            raise TokenInvalid("undecodable token payload") from exc
        expires = from_iso(payload["exp"])
        if self.clock.now() >= expires:
            raise TokenExpired("token expired")
        return Principal(
            subject=payload["sub"],
            display_name=payload.get("name", ""),
            enclaves=frozenset(payload.get("enclaves") or ()),
            roles=frozenset(payload.get("roles") or ("reader",)),
            issued_via=payload.get("via", "local"),
        )
