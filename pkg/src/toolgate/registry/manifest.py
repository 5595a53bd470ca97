"""Server manifests, version advisories, and the verified-name registry.

A manifest describes one server's identity: publisher-qualified namespace,
display name, dotted numeric version, protocol version, tool set, and
optional integrity metadata (package checksum, detached signature). The
namespace grammar forbids uppercase on purpose: case and confusable tricks
are a normalization concern for the detectors, not an identity concern.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..detectors.findings import Finding, ThreatKind, finding, sort_findings
from ..protocol.tools import ToolDescriptor, descriptor_from_wire, descriptor_to_wire

NAMESPACE_RE = re.compile(r"^[a-z0-9_-]+(/[a-z0-9_-]+)?$")
VERSION_RE = re.compile(r"^\d+(\.\d+){0,3}$")


class ManifestError(ValueError):
    """Manifest content violates its invariants or cannot be parsed."""


def parse_version(version: str) -> tuple[int, ...]:
    """Parse 1-4 dot-separated non-negative integers."""
    if not VERSION_RE.match(version or ""):
        raise ManifestError(f"not a dotted numeric version: {version!r}")
    return tuple(int(part) for part in version.split("."))


def _compare_versions(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    width = max(len(a), len(b))
    pa = a + (0,) * (width - len(a))
    pb = b + (0,) * (width - len(b))
    return (pa > pb) - (pa < pb)


@dataclass(frozen=True)
class ServerManifest:
    namespace: str
    display_name: str
    version: str
    description: str = ""
    protocol_version: str = ""
    tools: tuple[ToolDescriptor, ...] = ()
    checksum: str | None = None
    signature: bytes | None = None
    publisher_key_id: str | None = None
    tool_categories: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not NAMESPACE_RE.match(self.namespace):
            raise ManifestError(f"invalid namespace: {self.namespace!r}")
        parse_version(self.version)
        object.__setattr__(self, "tools", tuple(self.tools))

    def version_tuple(self) -> tuple[int, ...]:
        return parse_version(self.version)


def manifest_to_obj(m: ServerManifest) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "namespace": m.namespace,
        "display_name": m.display_name,
        "version": m.version,
        "description": m.description,
        "protocol_version": m.protocol_version,
        "tools": [descriptor_to_wire(t) for t in m.tools],
    }
    if m.checksum is not None:
        obj["checksum"] = m.checksum
    if m.signature is not None:
        obj["signature"] = m.signature.hex()
    if m.publisher_key_id is not None:
        obj["publisher_key_id"] = m.publisher_key_id
    if m.tool_categories:
        obj["tool_categories"] = dict(m.tool_categories)
    return obj


def manifest_from_obj(obj: dict[str, Any]) -> ServerManifest:
    try:
        tools = tuple(descriptor_from_wire(t) for t in obj.get("tools", []))
        signature = obj.get("signature")
        return ServerManifest(
            namespace=obj["namespace"],
            display_name=obj.get("display_name", obj["namespace"]),
            version=obj["version"],
            description=obj.get("description", ""),
            protocol_version=obj.get("protocol_version", ""),
            tools=tools,
            checksum=obj.get("checksum"),
            signature=bytes.fromhex(signature) if isinstance(signature, str) else None,
            publisher_key_id=obj.get("publisher_key_id"),
            tool_categories=dict(obj.get("tool_categories", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(f"malformed manifest: {exc}") from exc


def load_manifest(path: str | Path) -> ServerManifest:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ManifestError(f"manifest {path} is not a JSON object")
    return manifest_from_obj(obj)


@dataclass(frozen=True)
class Advisory:
    """One vulnerable-version advisory with an inclusive, optionally open range."""

    namespace: str
    summary: str
    min_version: str | None = None
    max_version: str | None = None

    def __post_init__(self) -> None:
        lo = parse_version(self.min_version) if self.min_version else None
        hi = parse_version(self.max_version) if self.max_version else None
        if lo is not None and hi is not None and _compare_versions(lo, hi) > 0:
            raise ManifestError(f"advisory range lower bound exceeds upper: {self}")

    def contains(self, version: str) -> bool:
        v = parse_version(version)
        if self.min_version and _compare_versions(v, parse_version(self.min_version)) < 0:
            return False
        if self.max_version and _compare_versions(v, parse_version(self.max_version)) > 0:
            return False
        return True


def load_advisories(path: str | Path) -> list[Advisory]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ManifestError(f"advisory file {path} must be a JSON array")
    out = []
    for obj in raw:
        rng = obj.get("affected_versions", {})
        out.append(
            Advisory(
                namespace=obj["namespace"],
                summary=obj.get("summary", ""),
                min_version=rng.get("min"),
                max_version=rng.get("max"),
            )
        )
    return out


def check_advisories(manifest: ServerManifest, advisories: list[Advisory]) -> list[Finding]:
    """One VULNERABLE_VERSION finding per advisory covering this version."""
    found = [
        finding(
            ThreatKind.VULNERABLE_VERSION,
            evidence=f"version {manifest.version} affected: {adv.summary}",
            location=manifest.namespace,
            rule_id="advisory.version_range",
        )
        for adv in advisories
        if adv.namespace == manifest.namespace and adv.contains(manifest.version)
    ]
    return sort_findings(found)


@dataclass(frozen=True)
class RegistryEntry:
    """A known namespace and, when verified, its publisher signing key."""

    namespace: str
    verified: bool = False
    publisher_key_id: str | None = None
    publisher_key: str | None = None  # Ed25519 public key, hex

    def __post_init__(self) -> None:
        if not NAMESPACE_RE.match(self.namespace):
            raise ManifestError(f"invalid registry namespace: {self.namespace!r}")
        if self.verified and not self.publisher_key_id:
            raise ManifestError(f"verified entry {self.namespace!r} needs a publisher_key_id")


class Registry:
    """Local verified-name registry with publisher key lookup."""

    def __init__(self, entries: list[RegistryEntry] | None = None):
        self.entries: list[RegistryEntry] = list(entries or [])

    def verified_entries(self) -> list[RegistryEntry]:
        return [e for e in self.entries if e.verified]

    def lookup(self, namespace: str) -> RegistryEntry | None:
        for e in self.entries:
            if e.namespace == namespace:
                return e
        return None

    def public_key(self, key_id: str) -> bytes | None:
        for e in self.entries:
            if e.publisher_key_id == key_id and e.publisher_key:
                return bytes.fromhex(e.publisher_key)
        return None

    @classmethod
    def load(cls, path: str | Path) -> "Registry":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            raise ManifestError(f"registry file {path} must be a JSON array")
        return cls(
            [
                RegistryEntry(
                    namespace=obj["namespace"],
                    verified=bool(obj.get("verified", False)),
                    publisher_key_id=obj.get("publisher_key_id"),
                    publisher_key=obj.get("publisher_key"),
                )
                for obj in raw
            ]
        )

    def dump(self, path: str | Path) -> None:
        out = []
        for e in self.entries:
            obj: dict[str, Any] = {"namespace": e.namespace, "verified": e.verified}
            if e.publisher_key_id:
                obj["publisher_key_id"] = e.publisher_key_id
            if e.publisher_key:
                obj["publisher_key"] = e.publisher_key
            out.append(obj)
        Path(path).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
