"""Name similarity: typosquat and tool-name-conflict detection.

Edit distance alone misses the flagship impersonation pattern — swapped
token order like "github-mcp" vs "mcp-github" sits far beyond any sane
distance threshold — so similarity combines Damerau-Levenshtein distance
over normalized names with an explicit token-permutation check.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..protocol.tools import ToolDescriptor
from .findings import Finding, ThreatKind, finding, sort_findings

# fixed confusable-character table applied after lowercasing
CONFUSABLES = {"0": "o", "1": "l"}

_SEPARATORS = ("-", "_", "/")


def normalize_name(name: str) -> tuple[str, list[str]]:
    """Canonicalize a server/tool name: casefold, defang confusables, tokenize."""
    if not name:
        raise ValueError("name must be non-empty")
    lowered = name.lower()
    mapped = "".join(CONFUSABLES.get(c, c) for c in lowered)
    for sep in _SEPARATORS[1:]:
        mapped = mapped.replace(sep, _SEPARATORS[0])
    tokens = [t for t in mapped.split(_SEPARATORS[0]) if t]
    return "-".join(tokens), tokens


def damerau_levenshtein(a: str, b: str) -> int:
    """Edit distance where adjacent transposition counts as one edit."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return la or lb
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


@dataclass(frozen=True)
class NameSimilarityReport:
    edit_distance: int
    token_permutation: bool
    normalized_equal: bool


def name_similarity(a: str, b: str) -> NameSimilarityReport:
    canon_a, tokens_a = normalize_name(a)
    canon_b, tokens_b = normalize_name(b)
    return NameSimilarityReport(
        edit_distance=damerau_levenshtein(canon_a, canon_b),
        token_permutation=Counter(tokens_a) == Counter(tokens_b) and tokens_a != tokens_b,
        normalized_equal=canon_a == canon_b,
    )


def detect_typosquat(candidate_namespace: str, registry_entries: Iterable, threshold: int = 2) -> list[Finding]:
    """Flag an unverified namespace that shadows a verified one.

    An exact (raw string) match with a verified entry is that entry, not a
    squat; anything that merely normalizes equal, permutes its tokens, or
    sits within the edit-distance threshold is flagged.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    entries = list(registry_entries)
    own = next((e for e in entries if e.namespace == candidate_namespace), None)
    if own is not None and own.verified:
        return []
    findings = []
    for entry in entries:
        if not entry.verified or entry.namespace == candidate_namespace:
            continue
        report = name_similarity(candidate_namespace, entry.namespace)
        if report.normalized_equal:
            rule, reason = "typosquat.normalized_equal", "normalizes identically to"
        elif report.token_permutation:
            rule, reason = "typosquat.token_permutation", "permutes the tokens of"
        elif 0 < report.edit_distance <= threshold:
            rule, reason = "typosquat.edit_distance", f"is within edit distance {report.edit_distance} of"
        else:
            continue
        findings.append(
            finding(
                ThreatKind.NAMESPACE_TYPOSQUAT,
                evidence=f"{candidate_namespace!r} {reason} verified namespace {entry.namespace!r}",
                location=candidate_namespace,
                rule_id=rule,
            )
        )
    return sort_findings(findings)


def detect_tool_conflicts(tools_by_server: Mapping[str, Sequence[ToolDescriptor]]) -> list[Finding]:
    """Conflicting unqualified tool names across (or within) servers.

    Registration order — the mapping's iteration order — discriminates a
    symmetric conflict from shadowing: the later registrant re-declaring an
    existing name is the shadowing suspect.
    """
    if not tools_by_server:
        raise ValueError("at least one server required")
    declarations: dict[str, list[str]] = {}
    shadowing: list[Finding] = []
    seen_names: dict[str, str] = {}  # tool name -> first declaring server
    for server, tools in tools_by_server.items():
        for tool in tools:
            name = tool.alias or tool.name
            declarations.setdefault(name, []).append(server)
            first = seen_names.get(name)
            if first is None:
                seen_names[name] = server
            elif first != server:
                shadowing.append(
                    finding(
                        ThreatKind.CROSS_SERVER_SHADOWING,
                        evidence=f"{server!r} re-declares {name!r} already registered by {first!r}",
                        location=f"{server}/{name}",
                        rule_id="shadowing.later_registrant",
                    )
                )

    conflicts = []
    for name, servers in declarations.items():
        if len(set(servers)) >= 2 or len(servers) >= 2:
            conflicts.append(
                finding(
                    ThreatKind.TOOL_NAME_CONFLICT,
                    evidence=f"tool name {name!r} declared by: {', '.join(dict.fromkeys(servers))}"
                    + (" (duplicated within one server)" if len(servers) > len(set(servers)) else ""),
                    location=name,
                    rule_id="conflict.duplicate_name",
                )
            )
    return sort_findings(conflicts + shadowing)
