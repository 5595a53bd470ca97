"""Threat taxonomy and the Finding record every detector emits.

Sixteen threat kinds, one per taxonomy row. Severity defaults encode the
enforcement policy: identity/integrity threats block, information-quality
threats warn (they carry inherent false-positive risk); a PolicyConfig can
override either direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

EVIDENCE_LIMIT = 512


class ThreatKind(Enum):
    NAMESPACE_TYPOSQUAT = "NAMESPACE_TYPOSQUAT"
    TOOL_NAME_CONFLICT = "TOOL_NAME_CONFLICT"
    PREFERENCE_MANIPULATION = "PREFERENCE_MANIPULATION"
    TOOL_POISONING = "TOOL_POISONING"
    RUG_PULL = "RUG_PULL"
    CROSS_SERVER_SHADOWING = "CROSS_SERVER_SHADOWING"
    COMMAND_INJECTION = "COMMAND_INJECTION"
    INSTALLER_SPOOFING = "INSTALLER_SPOOFING"
    INDIRECT_PROMPT_INJECTION = "INDIRECT_PROMPT_INJECTION"
    CREDENTIAL_THEFT = "CREDENTIAL_THEFT"
    SANDBOX_ESCAPE = "SANDBOX_ESCAPE"
    TOOL_CHAINING_ABUSE = "TOOL_CHAINING_ABUSE"
    UNAUTHORIZED_ACCESS = "UNAUTHORIZED_ACCESS"
    VULNERABLE_VERSION = "VULNERABLE_VERSION"
    PRIVILEGE_PERSISTENCE = "PRIVILEGE_PERSISTENCE"
    CONFIG_DRIFT = "CONFIG_DRIFT"


class Severity(Enum):
    INFO = "Info"
    WARN = "Warn"
    BLOCK = "Block"

    @property
    def rank(self) -> int:
        return {"Info": 0, "Warn": 1, "Block": 2}[self.value]


DEFAULT_SEVERITY: dict[ThreatKind, Severity] = {
    ThreatKind.NAMESPACE_TYPOSQUAT: Severity.BLOCK,
    ThreatKind.TOOL_NAME_CONFLICT: Severity.BLOCK,
    ThreatKind.PREFERENCE_MANIPULATION: Severity.WARN,
    ThreatKind.TOOL_POISONING: Severity.BLOCK,
    ThreatKind.RUG_PULL: Severity.BLOCK,
    ThreatKind.CROSS_SERVER_SHADOWING: Severity.BLOCK,
    ThreatKind.COMMAND_INJECTION: Severity.BLOCK,
    ThreatKind.INSTALLER_SPOOFING: Severity.BLOCK,
    ThreatKind.INDIRECT_PROMPT_INJECTION: Severity.WARN,
    ThreatKind.CREDENTIAL_THEFT: Severity.WARN,
    ThreatKind.SANDBOX_ESCAPE: Severity.BLOCK,
    ThreatKind.TOOL_CHAINING_ABUSE: Severity.BLOCK,
    ThreatKind.UNAUTHORIZED_ACCESS: Severity.BLOCK,
    ThreatKind.VULNERABLE_VERSION: Severity.BLOCK,
    ThreatKind.PRIVILEGE_PERSISTENCE: Severity.WARN,
    ThreatKind.CONFIG_DRIFT: Severity.WARN,
}


@dataclass(frozen=True)
class Finding:
    """One detected threat instance."""

    kind: ThreatKind
    severity: Severity
    evidence: str
    location: str
    rule_id: str

    def __post_init__(self) -> None:
        if not self.evidence:
            raise ValueError("finding evidence must be non-empty")
        if len(self.evidence) > EVIDENCE_LIMIT:
            object.__setattr__(self, "evidence", self.evidence[: EVIDENCE_LIMIT - 1] + "…")

    def to_json_obj(self) -> dict:
        # stable field order for golden tests
        return {
            "kind": self.kind.value,
            "severity": self.severity.value,
            "evidence": self.evidence,
            "location": self.location,
            "rule_id": self.rule_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False)


def finding(kind: ThreatKind, evidence: str, location: str, rule_id: str,
            severity: Severity | None = None) -> Finding:
    """Build a Finding at the taxonomy default severity unless overridden."""
    return Finding(kind, severity or DEFAULT_SEVERITY[kind], evidence, location, rule_id)


def sort_findings(findings: Iterable[Finding]) -> list[Finding]:
    """Deterministic detector output order: by location, then rule id."""
    return sorted(findings, key=lambda f: (f.location, f.rule_id, f.kind.value, f.evidence))


def apply_severity_overrides(findings: Iterable[Finding],
                             overrides: dict[ThreatKind, Severity]) -> list[Finding]:
    return [
        replace(f, severity=overrides[f.kind]) if f.kind in overrides else f
        for f in findings
    ]


def max_severity(findings: Iterable[Finding]) -> Severity | None:
    best: Severity | None = None
    for f in findings:
        if best is None or f.severity.rank > best.rank:
            best = f.severity
    return best
