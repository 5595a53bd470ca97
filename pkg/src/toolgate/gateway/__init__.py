"""Runtime enforcement: admission, interception, sessions, audit."""

from .audit import AuditEvent, AuditLog, AuditVerification, EventKind, GENESIS_HASH, verify_audit
from .core import (
    AdmissionDecision,
    AdmissionError,
    Gateway,
    GatewayError,
    PolicyViolation,
    UnknownTool,
    qualify_tool_names,
)
from .frontend import GatewayFrontend, serve_gateway_stdio
from .policy import (
    ChainAction,
    ChainRule,
    PolicyConfig,
    PolicyError,
    TaintLabel,
    ToolCategory,
    default_chain_rules,
    evaluate_chain_rules,
    infer_category,
)
from .sessions import (
    Clock,
    SessionError,
    SessionExpired,
    SessionManager,
    SessionRecord,
    SessionRevoked,
    SystemClock,
    UnknownSession,
    VirtualClock,
)

__all__ = [
    "AdmissionDecision",
    "AdmissionError",
    "AuditEvent",
    "AuditLog",
    "AuditVerification",
    "ChainAction",
    "ChainRule",
    "Clock",
    "EventKind",
    "GENESIS_HASH",
    "Gateway",
    "GatewayError",
    "GatewayFrontend",
    "PolicyConfig",
    "PolicyError",
    "PolicyViolation",
    "SessionError",
    "SessionExpired",
    "SessionManager",
    "SessionRecord",
    "SessionRevoked",
    "SystemClock",
    "TaintLabel",
    "ToolCategory",
    "UnknownSession",
    "UnknownTool",
    "VirtualClock",
    "default_chain_rules",
    "evaluate_chain_rules",
    "infer_category",
    "qualify_tool_names",
    "serve_gateway_stdio",
    "verify_audit",
]
