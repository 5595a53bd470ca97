"""Phrase lexicons driving the text detectors.

Lexicons are data, not code: a JSON object mapping a rule id (category
name) to its phrase list. Phrases are stored lowercase; matching is
case-insensitive with whitespace runs collapsed, so phrase files never
need spacing or casing variants. The shipped lists are deliberately
tight — every entry is validated against the benign corpus, which must
stay finding-free.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

IMPERATIVE_INSTRUCTIONS = "imperative_instructions"
SENSITIVE_PATHS = "sensitive_paths"
EXFIL_MARKERS = "exfil_markers"
SELF_PROMOTION = "self_promotion"
SUPERLATIVES = "superlatives"
CREDENTIAL_KEY_PATTERNS = "credential_key_patterns"

METADATA_CATEGORIES = (IMPERATIVE_INSTRUCTIONS, SENSITIVE_PATHS, EXFIL_MARKERS)


class LexiconError(ValueError):
    pass


def compile_phrase(phrase: str) -> re.Pattern[str]:
    """Compile a lowercase phrase into a tolerant, word-bounded pattern."""
    pattern = re.escape(phrase).replace(r"\ ", r"\s+")
    if phrase[0].isalnum() or phrase[0] == "_":
        pattern = r"(?<!\w)" + pattern
    if phrase[-1].isalnum() or phrase[-1] == "_":
        pattern = pattern + r"(?!\w)"
    return re.compile(pattern, re.IGNORECASE)


@dataclass(frozen=True)
class Lexicon:
    categories: dict[str, tuple[str, ...]]
    _patterns: dict[str, tuple[tuple[str, re.Pattern[str]], ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        for category, phrases in self.categories.items():
            for phrase in phrases:
                if not phrase:
                    raise LexiconError(f"{category}: empty phrase")
                if phrase != phrase.lower():
                    raise LexiconError(f"{category}: phrase must be lowercase: {phrase!r}")

    def phrases(self, category: str) -> tuple[str, ...]:
        return self.categories.get(category, ())

    def patterns(self, category: str) -> tuple[tuple[str, re.Pattern[str]], ...]:
        cached = self._patterns.get(category)
        if cached is None:
            cached = tuple((p, compile_phrase(p)) for p in self.phrases(category))
            self._patterns[category] = cached
        return cached

    @classmethod
    def from_obj(cls, obj: dict) -> "Lexicon":
        if not isinstance(obj, dict):
            raise LexiconError("lexicon must be a JSON object of rule_id -> phrase list")
        categories = {}
        for rule_id, phrases in obj.items():
            if not isinstance(phrases, list) or not all(isinstance(p, str) for p in phrases):
                raise LexiconError(f"{rule_id}: phrase list must be an array of strings")
            categories[rule_id] = tuple(phrases)
        return cls(categories=categories)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        return cls.from_obj(json.loads(Path(path).read_text(encoding="utf-8")))


_default: Lexicon | None = None


def default_lexicon() -> Lexicon:
    """The packaged lexicon (cached)."""
    global _default
    if _default is None:
        data = resources.files("toolgate.detectors").joinpath("data/lexicon.json").read_text("utf-8")
        _default = Lexicon.from_obj(json.loads(data))
    return _default
