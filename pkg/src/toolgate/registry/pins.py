"""Pin store: first-seen tool definition hashes for rug-pull detection.

One JSON-lines file per namespace under the state directory, append-only.
The latest record per tool name wins on reads; pin_tools never overwrites,
so the first-seen hash stays the baseline a later run is diffed against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..protocol.tools import ToolDescriptor
from .hashing import canonical_hash


class StoreIoError(Exception):
    """The pin store could not be read or written."""


@dataclass(frozen=True)
class PinRecord:
    server_namespace: str
    tool_name: str
    definition_hash: str
    first_seen: int  # UTC seconds
    server_version: str


@dataclass(frozen=True)
class ChangeSet:
    """Partition of tool names into added / removed / modified."""

    added: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()
    modified: tuple[dict, ...] = ()  # {tool_name, old_hash, new_hash}

    def is_empty(self) -> bool:
        return not (self.added or self.removed or self.modified)


class PinStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _file_for(self, namespace: str) -> Path:
        return self.root / (namespace.replace("/", "__") + ".pins.jsonl")

    def records(self, namespace: str) -> dict[str, PinRecord]:
        """Current pins for one namespace (latest line per tool wins)."""
        path = self._file_for(namespace)
        if not path.exists():
            return {}
        out: dict[str, PinRecord] = {}
        try:
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                out[obj["tool_name"]] = PinRecord(
                    server_namespace=obj["namespace"],
                    tool_name=obj["tool_name"],
                    definition_hash=obj["definition_hash"],
                    first_seen=int(obj["first_seen"]),
                    server_version=obj["server_version"],
                )
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise StoreIoError(f"unreadable pin store {path}: {exc}") from exc
        return out

    def append(self, record: PinRecord) -> None:
        path = self._file_for(record.server_namespace)
        line = json.dumps(
            {
                "namespace": record.server_namespace,
                "tool_name": record.tool_name,
                "definition_hash": record.definition_hash,
                "first_seen": record.first_seen,
                "server_version": record.server_version,
            },
            ensure_ascii=False,
        )
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            raise StoreIoError(f"cannot write pin store {path}: {exc}") from exc


def pin_tools(
    store: PinStore,
    namespace: str,
    tools: Iterable[ToolDescriptor],
    *,
    server_version: str = "",
    now: int = 0,
) -> list[PinRecord]:
    """Pin each tool that has no existing record; never overwrites."""
    existing = store.records(namespace)
    written: list[PinRecord] = []
    for tool in tools:
        name = tool.alias or tool.name
        if name in existing:
            continue
        record = PinRecord(
            server_namespace=namespace,
            tool_name=name,
            definition_hash=canonical_hash(tool),
            first_seen=int(now),
            server_version=server_version,
        )
        store.append(record)
        existing[name] = record
        written.append(record)
    return written


def diff_pins(store: PinStore, namespace: str, current_tools: Iterable[ToolDescriptor]) -> ChangeSet:
    """Classify the current tool set against stored pins.

    Missing pins mean everything is "added"; a pinned tool whose canonical
    hash changed is "modified" — the detectable symptom of a rug pull.
    """
    pinned = store.records(namespace)
    current = {(t.alias or t.name): canonical_hash(t) for t in current_tools}

    added = sorted(name for name in current if name not in pinned)
    removed = sorted(name for name in pinned if name not in current)
    modified = [
        {"tool_name": name, "old_hash": pinned[name].definition_hash, "new_hash": current[name]}
        for name in sorted(current)
        if name in pinned and pinned[name].definition_hash != current[name]
    ]
    return ChangeSet(added=tuple(added), removed=tuple(removed), modified=tuple(modified))
