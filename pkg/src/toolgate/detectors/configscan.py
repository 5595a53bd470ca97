"""Configuration scanning: plaintext credentials and baseline drift."""

from __future__ import annotations

import json
import re
import warnings
from typing import Any

from .findings import Finding, ThreatKind, finding, sort_findings
from .lexicon import CREDENTIAL_KEY_PATTERNS, Lexicon


class ConfigParseWarning(UserWarning):
    """Config text is not valid JSON; scanning fell back to line mode."""


def _is_credential_key(key: str, lexicon: Lexicon) -> bool:
    lowered = key.lower()
    return any(lowered.endswith(suffix) for suffix in lexicon.phrases(CREDENTIAL_KEY_PATTERNS))


def _is_placeholder(value: str) -> bool:
    return value.startswith("$")  # covers "$VAR" and "${VAR}" references


def _mask(value: str) -> str:
    return value[:4] + "…" if len(value) > 4 else "…"


def _walk_credentials(node: Any, path: str, lexicon: Lexicon, out: list[Finding]) -> None:
    if isinstance(node, dict):
        for key, value in node.items():
            child = f"{path}.{key}" if path else str(key)
            if isinstance(key, str) and _is_credential_key(key, lexicon):
                if isinstance(value, str) and value and not _is_placeholder(value):
                    out.append(
                        finding(
                            ThreatKind.CREDENTIAL_THEFT,
                            evidence=f"plaintext value for {key}: {_mask(value)}",
                            location=child,
                            rule_id="credential.plaintext_value",
                        )
                    )
            _walk_credentials(value, child, lexicon, out)
    elif isinstance(node, list):
        for i, value in enumerate(node):
            _walk_credentials(value, f"{path}[{i}]", lexicon, out)


_LINE_KV = re.compile(r"""^\s*["']?(?P<key>[A-Za-z0-9_.-]+)["']?\s*[:=]\s*["']?(?P<value>[^"',\s]+)""")


def scan_config_credentials(config_text: str, lexicon: Lexicon) -> list[Finding]:
    """Credential-looking keys holding literal (non-placeholder) values.

    Valid JSON is walked structurally; anything else gets a line-based scan
    plus a ConfigParseWarning.
    """
    findings: list[Finding] = []
    if not config_text.strip():
        return []
    try:
        tree = json.loads(config_text)
    except json.JSONDecodeError:
        warnings.warn("config is not valid JSON; using line-based scan", ConfigParseWarning, stacklevel=2)
        for lineno, line in enumerate(config_text.splitlines(), start=1):
            m = _LINE_KV.match(line)
            if not m:
                continue
            key, value = m.group("key"), m.group("value")
            if _is_credential_key(key, lexicon) and value and not _is_placeholder(value):
                findings.append(
                    finding(
                        ThreatKind.CREDENTIAL_THEFT,
                        evidence=f"plaintext value for {key}: {_mask(value)}",
                        location=f"line {lineno}",
                        rule_id="credential.plaintext_value",
                    )
                )
        return sort_findings(findings)
    _walk_credentials(tree, "", lexicon, findings)
    return sort_findings(findings)


def _render(value: Any) -> str:
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def _diff(path: str, baseline: Any, live: Any, out: list[Finding]) -> None:
    if isinstance(baseline, dict) and isinstance(live, dict):
        for key in sorted(set(baseline) | set(live)):
            child = f"{path}.{key}" if path else str(key)
            if key not in live:
                out.append(
                    finding(
                        ThreatKind.CONFIG_DRIFT,
                        evidence=f"{child}: baseline={_render(baseline[key])} missing from live",
                        location=child,
                        rule_id="drift.missing_key",
                    )
                )
            elif key not in baseline:
                out.append(
                    finding(
                        ThreatKind.CONFIG_DRIFT,
                        evidence=f"{child}: extra in live={_render(live[key])}",
                        location=child,
                        rule_id="drift.extra_key",
                    )
                )
            else:
                _diff(child, baseline[key], live[key], out)
    elif baseline != live:
        out.append(
            finding(
                ThreatKind.CONFIG_DRIFT,
                evidence=f"{path or '<root>'}: baseline={_render(baseline)} live={_render(live)}",
                location=path or "<root>",
                rule_id="drift.changed_value",
            )
        )


def check_config_drift(baseline: Any, live: Any) -> list[Finding]:
    """Deep diff of live settings against the canonical baseline."""
    findings: list[Finding] = []
    _diff("", baseline, live, findings)
    return sort_findings(findings)
