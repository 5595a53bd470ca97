"""Pure, reentrant threat detectors over names, metadata, arguments,
outputs, and configuration. Same inputs, same findings, same order."""

from .configscan import ConfigParseWarning, check_config_drift, scan_config_credentials
from .findings import (
    DEFAULT_SEVERITY,
    Finding,
    Severity,
    ThreatKind,
    apply_severity_overrides,
    finding,
    max_severity,
    sort_findings,
)
from .lexicon import Lexicon, default_lexicon
from .names import (
    NameSimilarityReport,
    damerau_levenshtein,
    detect_tool_conflicts,
    detect_typosquat,
    name_similarity,
    normalize_name,
)
from .runtime import (
    INJECTION_TOKENS,
    detect_command_injection,
    resolve_under_root,
    validate_path_confinement,
    validate_sql_allowlist,
)
from .text import (
    detect_description_injection,
    detect_preference_manipulation,
    find_phrases,
    neutralize_text,
    sanitize_description,
    sanitize_tool_output,
)

__all__ = [
    "ConfigParseWarning",
    "DEFAULT_SEVERITY",
    "Finding",
    "INJECTION_TOKENS",
    "Lexicon",
    "NameSimilarityReport",
    "Severity",
    "ThreatKind",
    "apply_severity_overrides",
    "check_config_drift",
    "damerau_levenshtein",
    "default_lexicon",
    "detect_command_injection",
    "detect_description_injection",
    "detect_preference_manipulation",
    "detect_tool_conflicts",
    "detect_typosquat",
    "find_phrases",
    "finding",
    "max_severity",
    "name_similarity",
    "neutralize_text",
    "normalize_name",
    "resolve_under_root",
    "sanitize_description",
    "sanitize_tool_output",
    "scan_config_credentials",
    "sort_findings",
    "validate_path_confinement",
    "validate_sql_allowlist",
]
