"""Package integrity verification: checksum and detached signature.

Tri-state results: a check passes, fails, or is absent because the
manifest never promised it. Absence is reported, not invented — policy
decides whether unsigned packages are acceptable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from .hashing import sha256_hex
from .manifest import Registry, ServerManifest


class UnknownPublisherKey(Exception):
    """Manifest is signed but the registry holds no key for its key id."""


class TriState(Enum):
    PASS = "pass"
    FAIL = "fail"
    ABSENT = "absent"


@dataclass(frozen=True)
class VerificationReport:
    checksum_ok: TriState
    signature_ok: TriState

    def failed(self) -> bool:
        return TriState.FAIL in (self.checksum_ok, self.signature_ok)

    def incomplete(self) -> bool:
        return TriState.ABSENT in (self.checksum_ok, self.signature_ok)


def verify_package(manifest: ServerManifest, package_bytes: bytes, registry: Registry) -> VerificationReport:
    """Recompute the digest and verify the Ed25519 detached signature."""
    if manifest.checksum is None:
        checksum_ok = TriState.ABSENT
    elif sha256_hex(package_bytes) == manifest.checksum.lower():
        checksum_ok = TriState.PASS
    else:
        checksum_ok = TriState.FAIL

    if manifest.signature is None:
        signature_ok = TriState.ABSENT
    else:
        key_bytes = registry.public_key(manifest.publisher_key_id) if manifest.publisher_key_id else None
        if key_bytes is None:
            raise UnknownPublisherKey(f"no registry key for {manifest.publisher_key_id!r}")
        public_key = Ed25519PublicKey.from_public_bytes(key_bytes)
        try:
            public_key.verify(manifest.signature, package_bytes)
            signature_ok = TriState.PASS
        except InvalidSignature:
            signature_ok = TriState.FAIL

    return VerificationReport(checksum_ok=checksum_ok, signature_ok=signature_ok)


def sign_package(package_bytes: bytes, private_key_bytes: bytes) -> bytes:
    """Produce a detached Ed25519 signature (corpus and test fixture helper)."""
    return Ed25519PrivateKey.from_private_bytes(private_key_bytes).sign(package_bytes)


def public_key_hex(private_key_bytes: bytes) -> str:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    key = Ed25519PrivateKey.from_private_bytes(private_key_bytes)
    return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw).hex()
