"""Server identity, integrity, and history: hashing, pins, verification."""

from .hashing import canonical_hash, canonical_json, sha256_hex
from .manifest import (
    Advisory,
    ManifestError,
    Registry,
    RegistryEntry,
    ServerManifest,
    check_advisories,
    load_advisories,
    load_manifest,
    manifest_from_obj,
    manifest_to_obj,
    parse_version,
)
from .pins import ChangeSet, PinRecord, PinStore, StoreIoError, diff_pins, pin_tools
from .verify import TriState, UnknownPublisherKey, VerificationReport, sign_package, public_key_hex, verify_package

__all__ = [
    "Advisory",
    "ChangeSet",
    "ManifestError",
    "PinRecord",
    "PinStore",
    "Registry",
    "RegistryEntry",
    "ServerManifest",
    "StoreIoError",
    "TriState",
    "UnknownPublisherKey",
    "VerificationReport",
    "canonical_hash",
    "canonical_json",
    "check_advisories",
    "diff_pins",
    "load_advisories",
    "load_manifest",
    "manifest_from_obj",
    "manifest_to_obj",
    "parse_version",
    "pin_tools",
    "public_key_hex",
    "sha256_hex",
    "sign_package",
    "verify_package",
]
