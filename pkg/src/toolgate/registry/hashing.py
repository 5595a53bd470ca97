"""Canonical serialization and hashing of tool definitions.

The digest input is a canonical JSON form: keys sorted lexicographically,
UTF-8, no insignificant whitespace. ``server_id`` and ``alias`` are
gateway-assigned bookkeeping, not definition content, so they are excluded
— the same advertised tool hashes identically whichever gateway saw it.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from ..protocol.tools import ToolDescriptor


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_tool_content(t: ToolDescriptor) -> str:
    return canonical_json(
        {"name": t.alias or t.name, "description": t.description, "input_schema": t.input_schema}
    )


def canonical_hash(t: ToolDescriptor) -> str:
    """SHA-256 hex digest of the tool's canonical definition."""
    return hashlib.sha256(canonical_tool_content(t).encode("utf-8")).hexdigest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
