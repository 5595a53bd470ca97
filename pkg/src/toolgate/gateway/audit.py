"""Hash-chained, append-only audit log.

Each record's hash covers its predecessor's hash plus the canonical
serialization of its own fields, so truncation, reordering, or any
single-byte edit breaks verification at exactly the mutated record.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

from ..registry.hashing import canonical_json
from .sessions import Clock, SystemClock

GENESIS_HASH = "0" * 64


class StoreIoError(Exception):
    pass


class EventKind(Enum):
    ADMISSION = "Admission"
    LIST_TOOLS = "ListTools"
    CALL_TOOL = "CallTool"
    FINDING = "Finding"
    SESSION_EVENT = "SessionEvent"
    CONFIG_CHANGE = "ConfigChange"


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    timestamp: float
    event_kind: EventKind
    detail: Any
    prev_hash: str
    this_hash: str


def _chain_hash(prev_hash: str, seq: int, timestamp: float, event_kind: str, detail: Any) -> str:
    body = canonical_json(
        {"detail": detail, "event_kind": event_kind, "seq": seq, "timestamp": timestamp}
    )
    return hashlib.sha256((prev_hash + body).encode("utf-8")).hexdigest()


class AuditLog:
    """Serialized single-writer log; one JSON object per line."""

    def __init__(self, path: str | Path, clock: Clock | None = None):
        self.path = Path(path)
        self._clock = clock or SystemClock()
        self._seq = 0
        self._last_hash = GENESIS_HASH
        if self.path.exists():
            self._resume()

    def _resume(self) -> None:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise StoreIoError(f"cannot read audit log {self.path}: {exc}") from exc
        for line in lines:
            if not line.strip():
                continue
            obj = json.loads(line)
            self._seq = obj["seq"]
            self._last_hash = obj["this_hash"]

    def append(self, event_kind: EventKind, detail: Any) -> AuditEvent:
        seq = self._seq + 1
        timestamp = self._clock.now()
        this_hash = _chain_hash(self._last_hash, seq, timestamp, event_kind.value, detail)
        event = AuditEvent(
            seq=seq,
            timestamp=timestamp,
            event_kind=event_kind,
            detail=detail,
            prev_hash=self._last_hash,
            this_hash=this_hash,
        )
        line = json.dumps(
            {
                "seq": event.seq,
                "timestamp": event.timestamp,
                "event_kind": event.event_kind.value,
                "detail": event.detail,
                "prev_hash": event.prev_hash,
                "this_hash": event.this_hash,
            },
            ensure_ascii=False,
        )
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            raise StoreIoError(f"cannot append to audit log {self.path}: {exc}") from exc
        self._seq = seq
        self._last_hash = this_hash
        return event


@dataclass(frozen=True)
class AuditVerification:
    ok: bool
    events: int
    first_bad_seq: int | None = None


def verify_audit(path: str | Path) -> AuditVerification:
    """Recompute every link; report the first record that fails."""
    p = Path(path)
    if not p.exists():
        return AuditVerification(ok=True, events=0)
    try:
        # tolerate arbitrary on-disk corruption: a mangled byte must surface
        # as a broken record, not as a reader crash
        raw = p.read_bytes().decode("utf-8", errors="replace")
    except OSError as exc:
        raise StoreIoError(f"cannot read audit log {p}: {exc}") from exc
    lines = [l for l in raw.splitlines() if l.strip()]
    prev_hash = GENESIS_HASH
    for index, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
            seq = obj["seq"]
            recomputed = _chain_hash(prev_hash, seq, obj["timestamp"], obj["event_kind"], obj["detail"])
            if seq != index or obj["prev_hash"] != prev_hash or obj["this_hash"] != recomputed:
                return AuditVerification(ok=False, events=len(lines), first_bad_seq=index)
            prev_hash = obj["this_hash"]
        except (json.JSONDecodeError, KeyError, TypeError):
            return AuditVerification(ok=False, events=len(lines), first_bad_seq=index)
    return AuditVerification(ok=True, events=len(lines))
