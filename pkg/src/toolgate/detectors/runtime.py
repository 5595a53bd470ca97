"""Per-call argument validation: injection tokens, path confinement, SQL verbs.

These checks are pure string analysis. Path confinement in particular is
lexical on purpose — it never touches the filesystem, so the detector
stays reentrant and testable; symlink games are the embedding host's
problem, not this layer's.
"""

from __future__ import annotations

import re
from typing import Any

from .findings import Finding, ThreatKind, finding, sort_findings

# shell metacharacters and the exec= token from the classic injected-path PoC
INJECTION_TOKENS: tuple[str, ...] = (";", "|", "&", "$(", "`", "\n", "exec=")


def detect_command_injection(args: dict[str, Any], schema: dict[str, Any] | None = None) -> list[Finding]:
    """Scan string parameters for shell metacharacters or exec= payloads.

    Non-string parameters are never scanned; a parameter the schema types
    as non-string is skipped even if a string value sneaks in.
    """
    properties: dict[str, Any] = {}
    if isinstance(schema, dict):
        props = schema.get("properties")
        if isinstance(props, dict):
            properties = props
    findings = []
    for param, value in args.items():
        if not isinstance(value, str):
            continue
        declared = properties.get(param, {}).get("type") if isinstance(properties.get(param), dict) else None
        if declared is not None and declared != "string":
            continue
        hits = [tok for tok in INJECTION_TOKENS if tok in value]
        if hits:
            shown = ", ".join(repr(t) for t in hits)
            findings.append(
                finding(
                    ThreatKind.COMMAND_INJECTION,
                    evidence=f"parameter {param!r} contains {shown}: {value!r}",
                    location=param,
                    rule_id="injection.shell_metacharacters",
                )
            )
    return sort_findings(findings)


def _lexical_normalize(path: str) -> list[str]:
    """Collapse . and .. components without consulting the filesystem."""
    stack: list[str] = []
    for part in re.split(r"[/\\]+", path):
        if part in ("", "."):
            continue
        if part == "..":
            if stack and stack[-1] != "..":
                stack.pop()
            else:
                stack.append("..")  # escaped above the anchor; must stay visible
        else:
            stack.append(part)
    return stack


def resolve_under_root(workspace_root: str, requested: str) -> str:
    """Lexically resolve ``requested`` against an absolute root."""
    root_parts = _lexical_normalize(workspace_root)
    if requested.startswith(("/", "\\")):
        parts = _lexical_normalize(requested)
    else:
        parts = _lexical_normalize("/".join([workspace_root, requested]))
    return "/" + "/".join(parts)


def validate_path_confinement(
    workspace_root: str, requested: str, location: str = ""
) -> Finding | None:
    """None when the resolved path stays under the root, else a Block finding.

    The containment check is at a path-component boundary, so "/ws2/x"
    never passes for root "/ws".
    """
    if not workspace_root.startswith(("/", "\\")):
        raise ValueError(f"workspace_root must be absolute: {workspace_root!r}")
    root = "/" + "/".join(_lexical_normalize(workspace_root))
    resolved = resolve_under_root(workspace_root, requested)
    inside = resolved == root or resolved.startswith(root.rstrip("/") + "/")
    if inside and ".." not in resolved.split("/"):
        return None
    return finding(
        ThreatKind.SANDBOX_ESCAPE,
        evidence=f"path {requested!r} resolves to {resolved!r}, outside {root!r}",
        location=location or requested,
        rule_id="sandbox.path_confinement",
    )


_SQL_LINE_COMMENT = re.compile(r"--[^\n]*")
_SQL_BLOCK_COMMENT = re.compile(r"/\*.*?\*/", re.DOTALL)
_SQL_FIRST_TOKEN = re.compile(r"[A-Za-z_]+")


def validate_sql_allowlist(
    query: str, allowed_verbs: frozenset[str] | set[str] = frozenset({"select"}), location: str = ""
) -> list[Finding]:
    """First keyword of every statement must be an allowed verb.

    Keyword-level only: comments are stripped, statements split on ';',
    and the leading token compared against the allowlist.
    """
    stripped = _SQL_BLOCK_COMMENT.sub(" ", query)
    stripped = _SQL_LINE_COMMENT.sub(" ", stripped)
    findings = []
    for statement in stripped.split(";"):
        token = _SQL_FIRST_TOKEN.search(statement)
        if token is None:
            continue
        verb = token.group(0).lower()
        if verb not in allowed_verbs:
            findings.append(
                finding(
                    ThreatKind.SANDBOX_ESCAPE,
                    evidence=f"statement verb {verb!r} not in allowed set {sorted(allowed_verbs)}",
                    location=location or verb,
                    rule_id="sandbox.sql_verb",
                )
            )
    return sort_findings(findings)
