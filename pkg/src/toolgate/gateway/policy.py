"""Gateway policy: severity overrides, taint labels, categories, chain rules.

Chain rules are evaluated in order and the first match wins; an implicit
terminal Allow backs the list. The shipped defaults forbid the classic
exfiltration chains: anything that read files or credentials may not reach
a network-egress tool, and externally fetched content may not drive a file
write without approval.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from ..detectors.findings import Severity, ThreatKind

STATE_DIR_ENV = "TOOLGATE_STATE_DIR"
DEFAULT_SESSION_TTL = 900


class PolicyError(ValueError):
    """Policy file is malformed or inconsistent."""


class TaintLabel(Enum):
    FILE_READ = "FILE_READ"
    CREDENTIAL = "CREDENTIAL"
    EXTERNAL_CONTENT = "EXTERNAL_CONTENT"
    USER_INPUT = "USER_INPUT"


class ToolCategory(Enum):
    FILE_READ = "FILE_READ"
    FILE_WRITE = "FILE_WRITE"
    NETWORK_EGRESS = "NETWORK_EGRESS"
    DATABASE = "DATABASE"
    COMPUTE = "COMPUTE"
    OTHER = "OTHER"


class ChainAction(Enum):
    DENY = "Deny"
    REQUIRE_APPROVAL = "RequireApproval"
    ALLOW = "Allow"


@dataclass(frozen=True)
class ChainRule:
    from_labels: frozenset[TaintLabel]
    to_category: ToolCategory
    action: ChainAction

    def matches(self, taint: set[TaintLabel], target: ToolCategory) -> bool:
        return self.to_category is target and self.from_labels <= taint

    def describe(self) -> str:
        labels = "+".join(sorted(l.value for l in self.from_labels)) or "{}"
        return f"{labels} -> {self.to_category.value} = {self.action.value}"


def default_chain_rules() -> list[ChainRule]:
    return [
        ChainRule(frozenset({TaintLabel.FILE_READ}), ToolCategory.NETWORK_EGRESS, ChainAction.DENY),
        ChainRule(frozenset({TaintLabel.CREDENTIAL}), ToolCategory.NETWORK_EGRESS, ChainAction.DENY),
        ChainRule(
            frozenset({TaintLabel.EXTERNAL_CONTENT}), ToolCategory.FILE_WRITE, ChainAction.REQUIRE_APPROVAL
        ),
    ]


def evaluate_chain_rules(
    rules: Iterable[ChainRule], taint: set[TaintLabel], target: ToolCategory
) -> tuple[ChainAction, ChainRule | None]:
    """First matching rule decides; no match means the implicit Allow."""
    for rule in rules:
        if rule.matches(taint, target):
            return rule.action, rule
    return ChainAction.ALLOW, None


# name-keyword fallback when the manifest carries no category map
_CATEGORY_KEYWORDS: tuple[tuple[str, ToolCategory], ...] = (
    ("read", ToolCategory.FILE_READ),
    ("list", ToolCategory.FILE_READ),
    ("write", ToolCategory.FILE_WRITE),
    ("save", ToolCategory.FILE_WRITE),
    ("fetch", ToolCategory.NETWORK_EGRESS),
    ("http", ToolCategory.NETWORK_EGRESS),
    ("send", ToolCategory.NETWORK_EGRESS),
    ("query", ToolCategory.DATABASE),
    ("sql", ToolCategory.DATABASE),
)


def infer_category(tool_name: str) -> ToolCategory:
    tokens = set(tool_name.lower().replace("-", "_").split("_"))
    for keyword, category in _CATEGORY_KEYWORDS:
        if keyword in tokens:
            return category
    return ToolCategory.OTHER


@dataclass
class PolicyConfig:
    mode_overrides: dict[ThreatKind, Severity] = field(default_factory=dict)
    typosquat_threshold: int = 2
    session_ttl_seconds: int = DEFAULT_SESSION_TTL
    chain_rules: list[ChainRule] = field(default_factory=default_chain_rules)
    workspace_root: str = "/workspace"
    sql_allowed_verbs: frozenset[str] = frozenset({"select"})
    state_dir: str = ".toolgate"
    registry_path: str | None = None
    advisory_path: str | None = None
    pin_store_path: str | None = None
    baseline_config_path: str | None = None
    audit_log_path: str | None = None

    def __post_init__(self) -> None:
        if self.session_ttl_seconds <= 0:
            raise PolicyError("session_ttl_seconds must be positive")
        if self.typosquat_threshold < 1:
            raise PolicyError("typosquat_threshold must be >= 1")
        override = os.environ.get(STATE_DIR_ENV)
        if override:
            self.state_dir = override
        if self.pin_store_path is None:
            self.pin_store_path = str(Path(self.state_dir) / "pins")
        if self.audit_log_path is None:
            self.audit_log_path = str(Path(self.state_dir) / "audit.jsonl")

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "PolicyConfig":
        kwargs: dict[str, Any] = {}
        try:
            if "mode_overrides" in obj:
                kwargs["mode_overrides"] = {
                    ThreatKind(k): Severity(v) for k, v in obj["mode_overrides"].items()
                }
            if "chain_rules" in obj:
                kwargs["chain_rules"] = [
                    ChainRule(
                        from_labels=frozenset(TaintLabel(l) for l in rule["from_labels"]),
                        to_category=ToolCategory(rule["to_category"]),
                        action=ChainAction(rule["action"]),
                    )
                    for rule in obj["chain_rules"]
                ]
            if "sql_allowed_verbs" in obj:
                kwargs["sql_allowed_verbs"] = frozenset(v.lower() for v in obj["sql_allowed_verbs"])
            for key in (
                "typosquat_threshold",
                "session_ttl_seconds",
                "workspace_root",
                "state_dir",
                "registry_path",
                "advisory_path",
                "pin_store_path",
                "baseline_config_path",
                "audit_log_path",
            ):
                if key in obj:
                    kwargs[key] = obj[key]
        except (KeyError, ValueError, TypeError) as exc:
            raise PolicyError(f"malformed policy: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "PolicyConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise PolicyError(f"cannot read policy {path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise PolicyError(f"policy {path} must be a JSON object")
        return cls.from_obj(obj)

    def effective(self, findings: Iterable) -> list:
        """Findings with this policy's severity overrides applied."""
        from ..detectors.findings import apply_severity_overrides

        return apply_severity_overrides(findings, self.mode_overrides)
