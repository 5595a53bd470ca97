"""Text-borne threat detection: poisoned metadata, preference manipulation,
and adversarial tool output.

All matching works on raw text through case-insensitive, whitespace-
tolerant phrase patterns, so the surrounding code never has to carry a
separately normalized copy. Neutralization wraps each offending span in a
visible "[FILTERED: ...]" marker; spans already inside a marker are never
re-matched, which makes sanitization idempotent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable

from ..protocol.tools import ToolDescriptor
from .findings import Finding, ThreatKind, finding, sort_findings
from .lexicon import (
    EXFIL_MARKERS,
    IMPERATIVE_INSTRUCTIONS,
    METADATA_CATEGORIES,
    SELF_PROMOTION,
    SENSITIVE_PATHS,
    SUPERLATIVES,
    Lexicon,
)

FILTERED_MARKER_RE = re.compile(r"\[FILTERED: [^\]]*\]")

SUPERLATIVE_DENSITY_THRESHOLD = 3

_POISONING_RULES = {
    IMPERATIVE_INSTRUCTIONS: "poisoning.imperative_instructions",
    SENSITIVE_PATHS: "poisoning.sensitive_paths",
    EXFIL_MARKERS: "poisoning.exfil_markers",
}


@dataclass(frozen=True)
class PhraseMatch:
    category: str
    phrase: str
    start: int
    end: int


def _filtered_spans(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in FILTERED_MARKER_RE.finditer(text)]


def find_phrases(text: str, lexicon: Lexicon, categories: Iterable[str]) -> list[PhraseMatch]:
    """All lexicon matches in ``text``, skipping already-neutralized spans."""
    shielded = _filtered_spans(text)
    matches: list[PhraseMatch] = []
    for category in categories:
        for phrase, pattern in lexicon.patterns(category):
            for m in pattern.finditer(text):
                if any(lo <= m.start() and m.end() <= hi for lo, hi in shielded):
                    continue
                matches.append(PhraseMatch(category, phrase, m.start(), m.end()))
    matches.sort(key=lambda pm: (pm.start, pm.end, pm.category, pm.phrase))
    return matches


def neutralize_text(text: str, lexicon: Lexicon, categories: Iterable[str]) -> str:
    """Wrap every matching span in a visible [FILTERED: ...] marker.

    Overlapping matches are merged before rewriting; text without matches
    comes back byte-identical.
    """
    matches = find_phrases(text, lexicon, categories)
    if not matches:
        return text
    spans: list[list[int]] = []
    for pm in matches:
        if spans and pm.start <= spans[-1][1]:
            spans[-1][1] = max(spans[-1][1], pm.end)
        else:
            spans.append([pm.start, pm.end])
    out: list[str] = []
    cursor = 0
    for lo, hi in spans:
        out.append(text[cursor:lo])
        out.append(f"[FILTERED: {text[lo:hi]}]")
        cursor = hi
    out.append(text[cursor:])
    return "".join(out)


def _schema_texts(schema: Any, path: str = "input_schema") -> list[tuple[str, str]]:
    """String-valued annotations inside a schema tree, minus type names."""
    texts: list[tuple[str, str]] = []
    if isinstance(schema, dict):
        for key, value in schema.items():
            if key == "type":
                continue
            texts.extend(_schema_texts(value, f"{path}.{key}"))
    elif isinstance(schema, list):
        for i, value in enumerate(schema):
            texts.extend(_schema_texts(value, f"{path}[{i}]"))
    elif isinstance(schema, str):
        texts.append((path, schema))
    return texts


def detect_description_injection(t: ToolDescriptor, lexicon: Lexicon) -> list[Finding]:
    """Instruction-like language, sensitive paths, or URLs in tool metadata."""
    findings: list[Finding] = []
    seen: set[tuple[str, str, str]] = set()
    targets = [(f"{t.name}/description", t.description)]
    targets += [(f"{t.name}/{path}", text) for path, text in _schema_texts(t.input_schema)]
    for location, text in targets:
        if not text:
            continue
        for pm in find_phrases(text, lexicon, METADATA_CATEGORIES):
            rule_id = _POISONING_RULES[pm.category]
            key = (rule_id, pm.phrase, location)
            if key in seen:
                continue
            seen.add(key)
            findings.append(
                finding(ThreatKind.TOOL_POISONING, evidence=pm.phrase, location=location, rule_id=rule_id)
            )
    return sort_findings(findings)


def detect_preference_manipulation(t: ToolDescriptor, lexicon: Lexicon) -> list[Finding]:
    """Self-promoting phrasing that biases automated tool selection."""
    findings: list[Finding] = []
    location = f"{t.name}/description"
    text = t.description
    if not text:
        return []
    promo_seen: set[str] = set()
    for pm in find_phrases(text, lexicon, (SELF_PROMOTION,)):
        if pm.phrase in promo_seen:
            continue
        promo_seen.add(pm.phrase)
        findings.append(
            finding(
                ThreatKind.PREFERENCE_MANIPULATION,
                evidence=pm.phrase,
                location=location,
                rule_id="pma.self_promotion",
            )
        )
    superlatives = {pm.phrase for pm in find_phrases(text, lexicon, (SUPERLATIVES,))}
    if len(superlatives) >= SUPERLATIVE_DENSITY_THRESHOLD:
        findings.append(
            finding(
                ThreatKind.PREFERENCE_MANIPULATION,
                evidence="superlative density: " + ", ".join(sorted(superlatives)),
                location=location,
                rule_id="pma.superlative_density",
            )
        )
    return sort_findings(findings)


def sanitize_tool_output(
    text: str, lexicon: Lexicon, location: str = "output"
) -> tuple[str, list[Finding]]:
    """Neutralize model-directed imperatives hidden in returned text.

    Non-matching text is returned byte-identical; sanitizing already
    sanitized text yields no new findings.
    """
    matches = find_phrases(text, lexicon, (IMPERATIVE_INSTRUCTIONS,))
    findings = []
    seen: set[str] = set()
    for pm in matches:
        if pm.phrase in seen:
            continue
        seen.add(pm.phrase)
        findings.append(
            finding(
                ThreatKind.INDIRECT_PROMPT_INJECTION,
                evidence=pm.phrase,
                location=location,
                rule_id="output.imperative_instructions",
            )
        )
    return neutralize_text(text, lexicon, (IMPERATIVE_INSTRUCTIONS,)), sort_findings(findings)


def sanitize_description(text: str, lexicon: Lexicon) -> str:
    """Declarative rendering of tool metadata for exposure to clients."""
    return neutralize_text(text, lexicon, METADATA_CATEGORIES + (SELF_PROMOTION,))
