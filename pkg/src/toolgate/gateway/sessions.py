"""Session tokens: short-lived, revocable, taint-carrying.

Expiry is strict (a session is dead at exactly ``expires_at``, validation
never slides the window) and the clock is injected so expiry properties
are deterministic under test. Taint labels only accumulate; nothing ever
removes one within a session's lifetime.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field
from random import Random

from .policy import TaintLabel


class Clock:
    def now(self) -> float:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.time()


class VirtualClock(Clock):
    """Deterministic clock for scenario replay and expiry tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("clock cannot run backwards")
        self._now += seconds
        return self._now


class SessionError(Exception):
    def __init__(self, session_id: str, reason: str):
        super().__init__(f"session {session_id!r}: {reason}")
        self.session_id = session_id


class UnknownSession(SessionError):
    def __init__(self, session_id: str):
        super().__init__(session_id, "unknown")


class SessionRevoked(SessionError):
    def __init__(self, session_id: str):
        super().__init__(session_id, "revoked")


class SessionExpired(SessionError):
    def __init__(self, session_id: str):
        super().__init__(session_id, "expired")


@dataclass
class SessionRecord:
    session_id: str
    client_id: str
    created_at: float
    expires_at: float
    revoked: bool = False
    taint: set[TaintLabel] = field(default_factory=set)
    call_count: int = 0
    namespaces_called: set[str] = field(default_factory=set)

    def live(self, now: float) -> bool:
        return not self.revoked and now < self.expires_at


class SessionManager:
    def __init__(self, clock: Clock | None = None, ttl_seconds: int = 900, rng: Random | None = None):
        if ttl_seconds <= 0:
            raise ValueError("ttl_seconds must be positive")
        self._clock = clock or SystemClock()
        self._ttl = ttl_seconds
        self._rng = rng
        self._sessions: dict[str, SessionRecord] = {}

    def _new_id(self) -> str:
        if self._rng is not None:
            return f"{self._rng.getrandbits(128):032x}"
        return secrets.token_hex(16)

    def create(self, client_id: str) -> SessionRecord:
        now = self._clock.now()
        record = SessionRecord(
            session_id=self._new_id(),
            client_id=client_id,
            created_at=now,
            expires_at=now + self._ttl,
        )
        self._sessions[record.session_id] = record
        return record

    def validate(self, session_id: str) -> SessionRecord:
        """The live record, or the precise reason it is not usable.

        Never extends expiry: a session is invalid at exactly its
        ``expires_at`` instant.
        """
        record = self._sessions.get(session_id)
        if record is None:
            raise UnknownSession(session_id)
        if record.revoked:
            raise SessionRevoked(session_id)
        if self._clock.now() >= record.expires_at:
            raise SessionExpired(session_id)
        return record

    def revoke(self, session_id: str) -> SessionRecord:
        record = self._sessions.get(session_id)
        if record is None:
            raise UnknownSession(session_id)
        record.revoked = True
        return record

    def live_sessions(self) -> list[SessionRecord]:
        now = self._clock.now()
        return [r for r in self._sessions.values() if r.live(now)]

    def get(self, session_id: str) -> SessionRecord | None:
        return self._sessions.get(session_id)
