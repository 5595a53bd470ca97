"""The runtime enforcement point.

Admission gate (load time): package integrity, namespace identity,
advisories, metadata scanning, cross-server conflicts, and pin diffing —
all-or-nothing, so a rejected server contributes zero tools. Call gate
(runtime): argument injection scanning, sandbox-policy validation by tool
category, taint-based chain policy, output sanitization, taint update,
and a hash-chained audit trail around all of it.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from random import Random
from typing import Any, Callable

from ..detectors import (
    Finding,
    Severity,
    ThreatKind,
    check_config_drift,
    default_lexicon,
    detect_command_injection,
    detect_description_injection,
    detect_preference_manipulation,
    detect_tool_conflicts,
    detect_typosquat,
    finding,
    sanitize_description,
    sanitize_tool_output,
    scan_config_credentials,
    sort_findings,
    validate_path_confinement,
    validate_sql_allowlist,
)
from ..detectors.lexicon import Lexicon
from ..protocol.client import McpClient, ToolError, ToolResult, result_text
from ..protocol.tools import ToolDescriptor, qualify
from ..registry import (
    Advisory,
    PinStore,
    Registry,
    ServerManifest,
    UnknownPublisherKey,
    check_advisories,
    diff_pins,
    load_advisories,
    pin_tools,
    verify_package,
)
from .audit import AuditLog, EventKind, verify_audit
from .policy import (
    ChainAction,
    PolicyConfig,
    TaintLabel,
    ToolCategory,
    evaluate_chain_rules,
    infer_category,
)
from .sessions import Clock, SessionError, SessionManager, SessionRecord, SystemClock

logger = logging.getLogger(__name__)

_CREDENTIAL_MATERIAL_RE = re.compile(r"(?i)\b[a-z0-9_]*(_api_key|_token|_secret)\b\s*[:=]")


class GatewayError(Exception):
    pass


class AdmissionError(GatewayError):
    """Admission could not run (duplicate namespace, missing state)."""


class UnknownTool(GatewayError):
    pass


class PolicyViolation(GatewayError):
    """A call was refused; carries the findings that fired."""

    def __init__(self, findings: list[Finding], code: str = "policy_block"):
        kinds = ", ".join(sorted({f.kind.value for f in findings}))
        super().__init__(f"call refused ({code}): {kinds}")
        self.findings = findings
        self.code = code


@dataclass(frozen=True)
class AdmissionDecision:
    accepted: bool
    qualified_tools: tuple[ToolDescriptor, ...]
    findings: tuple[Finding, ...]

    def blocking(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.BLOCK]


@dataclass
class _AdmittedServer:
    manifest: ServerManifest
    client: McpClient | None
    originals: dict[str, ToolDescriptor] = field(default_factory=dict)  # qualified -> original def
    exposed: dict[str, ToolDescriptor] = field(default_factory=dict)  # qualified -> sanitized
    categories: dict[str, ToolCategory] = field(default_factory=dict)  # qualified -> category


def qualify_tool_names(namespace: str, tools: tuple[ToolDescriptor, ...]) -> list[ToolDescriptor]:
    """Rename every tool to ``namespace.name`` keeping originals as aliases."""
    return [qualify(t, namespace) for t in tools]


class Gateway:
    """Admission control, call interception, sessions, and audit."""

    def __init__(
        self,
        policy: PolicyConfig,
        *,
        clock: Clock | None = None,
        rng: Random | None = None,
        lexicon: Lexicon | None = None,
        registry: Registry | None = None,
        advisories: list[Advisory] | None = None,
        approval_hook: Callable[[SessionRecord, str, ToolCategory], bool] | None = None,
    ):
        self.policy = policy
        self.clock = clock or SystemClock()
        self.lexicon = lexicon or default_lexicon()
        self.approval_hook = approval_hook
        if registry is None:
            registry = Registry.load(policy.registry_path) if policy.registry_path else Registry()
        self.registry = registry
        if advisories is None:
            advisories = load_advisories(policy.advisory_path) if policy.advisory_path else []
        self.advisories = advisories
        assert policy.pin_store_path is not None and policy.audit_log_path is not None
        self.pins = PinStore(policy.pin_store_path)
        self.audit = AuditLog(policy.audit_log_path, clock=self.clock)
        self.sessions = SessionManager(clock=self.clock, ttl_seconds=policy.session_ttl_seconds, rng=rng)
        self._servers: dict[str, _AdmittedServer] = {}

    # ------------------------------------------------------------------
    # admission (lifecycle: creation / deployment checks)
    # ------------------------------------------------------------------

    def _audit_findings(self, findings: list[Finding], context: str) -> None:
        for f in findings:
            self.audit.append(
                EventKind.FINDING,
                {
                    "context": context,
                    "kind": f.kind.value,
                    "severity": f.severity.value,
                    "evidence": f.evidence,
                    "location": f.location,
                    "rule_id": f.rule_id,
                },
            )

    def _verify_package_findings(self, manifest: ServerManifest, package_bytes: bytes) -> list[Finding]:
        try:
            report = verify_package(manifest, package_bytes, self.registry)
        except UnknownPublisherKey as exc:
            return [
                finding(
                    ThreatKind.INSTALLER_SPOOFING,
                    evidence=str(exc),
                    location=manifest.namespace,
                    rule_id="installer.unknown_publisher_key",
                )
            ]
        found = []
        if report.checksum_ok.value == "fail":
            found.append(
                finding(
                    ThreatKind.INSTALLER_SPOOFING,
                    evidence=f"package digest does not match manifest checksum {manifest.checksum}",
                    location=manifest.namespace,
                    rule_id="installer.checksum_mismatch",
                )
            )
        if report.signature_ok.value == "fail":
            found.append(
                finding(
                    ThreatKind.INSTALLER_SPOOFING,
                    evidence=f"detached signature invalid for key {manifest.publisher_key_id}",
                    location=manifest.namespace,
                    rule_id="installer.signature_invalid",
                )
            )
        return found

    def _rescope(self, findings: list[Finding], namespace: str) -> list[Finding]:
        return [
            f if f.location.startswith(namespace) else replace(f, location=f"{namespace}/{f.location}")
            for f in findings
        ]

    def admit_server(
        self,
        manifest: ServerManifest,
        package_bytes: bytes | None = None,
        client: McpClient | None = None,
    ) -> AdmissionDecision:
        """Run the full load-time pipeline and register the server if clean.

        Pipeline order: package verification, typosquat, advisories,
        per-tool metadata scanning, conflicts against already-admitted
        servers, pin diff (rug pull), then pinning of genuinely new tools.
        """
        namespace = manifest.namespace
        if namespace in self._servers:
            raise AdmissionError(f"namespace {namespace!r} already admitted")

        findings: list[Finding] = []
        if package_bytes is not None:
            findings += self._verify_package_findings(manifest, package_bytes)
        findings += detect_typosquat(
            namespace, self.registry.entries, threshold=self.policy.typosquat_threshold
        )
        findings += check_advisories(manifest, self.advisories)
        for tool in manifest.tools:
            findings += self._rescope(detect_description_injection(tool, self.lexicon), namespace)
            findings += self._rescope(detect_preference_manipulation(tool, self.lexicon), namespace)

        conflict_map = {ns: list(srv.originals.values()) for ns, srv in self._servers.items()}
        conflict_map[namespace] = list(manifest.tools)
        findings += detect_tool_conflicts(conflict_map)

        changes = diff_pins(self.pins, namespace, manifest.tools)
        for mod in changes.modified:
            findings.append(
                finding(
                    ThreatKind.RUG_PULL,
                    evidence=(
                        f"tool {mod['tool_name']!r} definition changed: "
                        f"{mod['old_hash'][:16]}… -> {mod['new_hash'][:16]}…"
                    ),
                    location=f"{namespace}/{mod['tool_name']}",
                    rule_id="rugpull.definition_change",
                )
            )

        findings = sort_findings(self.policy.effective(findings))
        accepted = all(f.severity is not Severity.BLOCK for f in findings)

        qualified: list[ToolDescriptor] = []
        category_sources: dict[str, str] = {}
        if accepted:
            pin_tools(
                self.pins,
                namespace,
                manifest.tools,
                server_version=manifest.version,
                now=int(self.clock.now()),
            )
            qualified = qualify_tool_names(namespace, manifest.tools)
            record = _AdmittedServer(manifest=manifest, client=client)
            for original, q in zip(manifest.tools, qualified):
                mapped = manifest.tool_categories.get(original.name)
                if mapped is not None:
                    category = ToolCategory(mapped)
                    category_sources[q.name] = "manifest"
                else:
                    category = infer_category(original.name)
                    category_sources[q.name] = "name_inference"
                record.originals[q.name] = q
                record.categories[q.name] = category
                record.exposed[q.name] = replace(
                    q, description=sanitize_description(q.description, self.lexicon)
                )
            self._servers[namespace] = record

        self._audit_findings(findings, context=f"admission:{namespace}")
        self.audit.append(
            EventKind.ADMISSION,
            {
                "namespace": namespace,
                "version": manifest.version,
                "accepted": accepted,
                "finding_rules": [f.rule_id for f in findings],
                "tools": [q.name for q in qualified],
                "category_sources": category_sources,
                "pin_changes": {
                    "added": list(changes.added),
                    "removed": list(changes.removed),
                    "modified": [m["tool_name"] for m in changes.modified],
                },
            },
        )
        return AdmissionDecision(
            accepted=accepted, qualified_tools=tuple(qualified), findings=tuple(findings)
        )

    def update_server(
        self,
        manifest: ServerManifest,
        package_bytes: bytes | None = None,
        client: McpClient | None = None,
    ) -> tuple[int, AdmissionDecision]:
        """Replace an admitted server with a new version.

        Sessions that touched the namespace are revoked before the new
        version goes through the full admission pipeline again.
        """
        namespace = manifest.namespace
        if namespace not in self._servers:
            raise AdmissionError(f"namespace {namespace!r} is not admitted")
        revoked = self.revoke_on_update(namespace, manifest.version)
        old = self._servers.pop(namespace)
        if old.client is not None and old.client is not client:
            old.client.close()
        decision = self.admit_server(manifest, package_bytes=package_bytes, client=client)
        return revoked, decision

    @property
    def admitted_namespaces(self) -> list[str]:
        return list(self._servers.keys())

    # ------------------------------------------------------------------
    # sessions
    # ------------------------------------------------------------------

    def create_session(self, client_id: str) -> SessionRecord:
        record = self.sessions.create(client_id)
        self.audit.append(
            EventKind.SESSION_EVENT,
            {
                "action": "create",
                "session_id": record.session_id,
                "client_id": client_id,
                "expires_at": record.expires_at,
            },
        )
        return record

    def validate_session(self, session_id: str) -> SessionRecord:
        return self.sessions.validate(session_id)

    def revoke_session(self, session_id: str) -> None:
        self.sessions.revoke(session_id)
        self.audit.append(
            EventKind.SESSION_EVENT, {"action": "revoke", "session_id": session_id}
        )

    def _require_session(self, session_id: str, context: str) -> SessionRecord:
        try:
            return self.sessions.validate(session_id)
        except SessionError as exc:
            f = self.policy.effective(
                [
                    finding(
                        ThreatKind.UNAUTHORIZED_ACCESS,
                        evidence=f"{context} with unusable session: {exc}",
                        location=f"session/{session_id}",
                        rule_id="session.invalid_token",
                    )
                ]
            )
            self._audit_findings(f, context=context)
            raise

    def revoke_on_update(self, namespace: str, new_version: str) -> int:
        """Revoke live sessions that touched the namespace being updated."""
        count = 0
        for record in self.sessions.live_sessions():
            if namespace not in record.namespaces_called:
                continue
            self.sessions.revoke(record.session_id)
            count += 1
            f = self.policy.effective(
                [
                    finding(
                        ThreatKind.PRIVILEGE_PERSISTENCE,
                        evidence=(
                            f"session {record.session_id} still live while {namespace} "
                            f"updated to {new_version}; revoked"
                        ),
                        location=f"{namespace}/session/{record.session_id}",
                        rule_id="update.session_revocation",
                    )
                ]
            )
            self._audit_findings(f, context=f"update:{namespace}")
            self.audit.append(
                EventKind.SESSION_EVENT,
                {
                    "action": "revoke_on_update",
                    "session_id": record.session_id,
                    "namespace": namespace,
                    "new_version": new_version,
                },
            )
        return count

    # ------------------------------------------------------------------
    # proxying (lifecycle: operation checks)
    # ------------------------------------------------------------------

    def proxy_list_tools(self, session_id: str) -> list[ToolDescriptor]:
        """Union of qualified tools over admitted servers, sanitized."""
        self._require_session(session_id, context="tools/list")
        tools = [t for srv in self._servers.values() for t in srv.exposed.values()]
        self.audit.append(
            EventKind.LIST_TOOLS, {"session_id": session_id, "count": len(tools)}
        )
        return tools

    def _resolve(self, qualified_name: str) -> tuple[str, _AdmittedServer, ToolDescriptor, ToolCategory]:
        for namespace, srv in self._servers.items():
            tool = srv.originals.get(qualified_name)
            if tool is not None:
                return namespace, srv, tool, srv.categories[qualified_name]
        raise UnknownTool(f"no admitted tool named {qualified_name!r}")

    def enforce_chain_policy(
        self, session: SessionRecord, target_category: ToolCategory
    ) -> tuple[Finding | None, str]:
        """First matching chain rule decides; returns (finding, refusal code).

        RequireApproval consults the approval hook when one is installed;
        headless it degrades to a denial with a distinct code.
        """
        action, rule = evaluate_chain_rules(self.policy.chain_rules, session.taint, target_category)
        if action is ChainAction.ALLOW:
            return None, ""
        if action is ChainAction.REQUIRE_APPROVAL and self.approval_hook is not None:
            if self.approval_hook(session, rule.describe() if rule else "", target_category):
                self.audit.append(
                    EventKind.SESSION_EVENT,
                    {
                        "action": "chain_approved",
                        "session_id": session.session_id,
                        "rule": rule.describe() if rule else "",
                    },
                )
                return None, ""
        code = "chain_denied" if action is ChainAction.DENY else "chain_approval_required"
        taint = "+".join(sorted(l.value for l in session.taint)) or "{}"
        f = finding(
            ThreatKind.TOOL_CHAINING_ABUSE,
            evidence=f"taint {taint} -> {target_category.value} refused by rule [{rule.describe() if rule else 'implicit'}]",
            location=f"session/{session.session_id}",
            rule_id="chain.first_match",
        )
        return self.policy.effective([f])[0], code

    def _category_findings(
        self, namespace: str, tool: ToolDescriptor, category: ToolCategory, args: dict[str, Any]
    ) -> list[Finding]:
        found: list[Finding] = []
        where = f"{namespace}/{tool.alias or tool.name}"
        if category in (ToolCategory.FILE_READ, ToolCategory.FILE_WRITE):
            for param, value in args.items():
                if not isinstance(value, str) or not _looks_like_path_param(param):
                    continue
                f = validate_path_confinement(
                    self.policy.workspace_root, value, location=f"{where}/{param}"
                )
                if f is not None:
                    found.append(f)
        if category is ToolCategory.DATABASE:
            for param, value in args.items():
                if not isinstance(value, str) or not _looks_like_sql_param(param):
                    continue
                found += validate_sql_allowlist(
                    value, self.policy.sql_allowed_verbs, location=f"{where}/{param}"
                )
        return found

    def _update_taint(
        self, session: SessionRecord, category: ToolCategory, text: str | None, cause: str
    ) -> list[Finding]:
        additions: list[TaintLabel] = []
        extra: list[Finding] = []
        if category is ToolCategory.FILE_READ:
            additions.append(TaintLabel.FILE_READ)
        if category is ToolCategory.NETWORK_EGRESS and text:
            additions.append(TaintLabel.EXTERNAL_CONTENT)
        credential_hit = _CREDENTIAL_MATERIAL_RE.search(text) if text else None
        if credential_hit:
            additions.append(TaintLabel.CREDENTIAL)
            key = credential_hit.group(0).rstrip(":= \t")
            extra.append(
                finding(
                    ThreatKind.CREDENTIAL_THEFT,
                    evidence=f"tool result carries credential material ({key})",
                    location=f"{cause}/output",
                    rule_id="credential.result_material",
                )
            )
        for label in additions:
            if label not in session.taint:
                session.taint.add(label)
                self.audit.append(
                    EventKind.SESSION_EVENT,
                    {
                        "action": "taint",
                        "session_id": session.session_id,
                        "label": label.value,
                        "cause": cause,
                    },
                )
        return self.policy.effective(extra)

    def proxy_call_tool(self, session_id: str, qualified_name: str, args: dict[str, Any] | None = None) -> ToolResult:
        """Intercept, validate, forward, sanitize, taint, audit — in that order.

        Any Block finding from the argument, sandbox-policy, or chain
        checks refuses the call before a byte reaches the origin server.
        """
        session = self._require_session(session_id, context=f"tools/call {qualified_name}")
        try:
            namespace, srv, tool, category = self._resolve(qualified_name)
        except UnknownTool:
            self.audit.append(
                EventKind.CALL_TOOL,
                {"session_id": session_id, "tool": qualified_name, "refused": "unknown_tool"},
            )
            raise
        args = dict(args or {})
        where = f"{namespace}/{tool.alias or tool.name}"

        # SQL parameters have their own grammar (';' separates statements);
        # the verb allowlist, not the shell scan, is authoritative for them
        shell_scan_args = args
        if category is ToolCategory.DATABASE:
            shell_scan_args = {k: v for k, v in args.items() if not _looks_like_sql_param(k)}

        pre: list[Finding] = []
        pre += [
            replace(f, location=f"{where}/{f.location}")
            for f in detect_command_injection(shell_scan_args, tool.input_schema)
        ]
        pre += self._category_findings(namespace, tool, category, args)
        pre = sort_findings(self.policy.effective(pre))
        chain_finding, chain_code = self.enforce_chain_policy(session, category)
        if chain_finding is not None:
            pre.append(chain_finding)

        blocking = [f for f in pre if f.severity is Severity.BLOCK]
        self._audit_findings(pre, context=f"call:{qualified_name}")
        if blocking:
            self.audit.append(
                EventKind.CALL_TOOL,
                {
                    "session_id": session_id,
                    "tool": qualified_name,
                    "refused": chain_code or "policy_block",
                    "finding_rules": [f.rule_id for f in blocking],
                },
            )
            raise PolicyViolation(blocking, code=chain_code or "policy_block")

        if srv.client is None:
            raise AdmissionError(f"{namespace!r} admitted without a connected backend")
        try:
            raw_result = srv.client.call_tool(tool.alias or tool.name, args)
        except ToolError as exc:
            self.audit.append(
                EventKind.CALL_TOOL,
                {"session_id": session_id, "tool": qualified_name, "error": str(exc)},
            )
            session.call_count += 1
            session.namespaces_called.add(namespace)
            raise

        sanitized_raw, sanitized_text, output_findings = self._sanitize_result(raw_result, where)
        output_findings = sort_findings(self.policy.effective(output_findings))
        output_findings += self._update_taint(session, category, sanitized_text, cause=qualified_name)
        self._audit_findings(output_findings, context=f"call:{qualified_name}")

        session.call_count += 1
        session.namespaces_called.add(namespace)
        self.audit.append(
            EventKind.CALL_TOOL,
            {
                "session_id": session_id,
                "tool": qualified_name,
                "forwarded": True,
                "finding_rules": [f.rule_id for f in pre + output_findings],
                "is_error": raw_result.is_error,
            },
        )
        return ToolResult(raw=sanitized_raw, text=sanitized_text, is_error=raw_result.is_error)

    def _sanitize_result(self, result: ToolResult, where: str) -> tuple[Any, str | None, list[Finding]]:
        findings: list[Finding] = []
        raw = result.raw
        if isinstance(raw, dict) and isinstance(raw.get("content"), list):
            new_content = []
            for item in raw["content"]:
                if isinstance(item, dict) and item.get("type") == "text" and isinstance(item.get("text"), str):
                    sanitized, fs = sanitize_tool_output(
                        item["text"], self.lexicon, location=f"{where}/output"
                    )
                    findings += fs
                    item = {**item, "text": sanitized}
                new_content.append(item)
            raw = {**raw, "content": new_content}
            return raw, result_text(raw), findings
        if result.text is not None:
            sanitized, findings = sanitize_tool_output(result.text, self.lexicon, location=f"{where}/output")
            return raw, sanitized, findings
        return raw, result.text, findings

    # ------------------------------------------------------------------
    # maintenance-phase checks
    # ------------------------------------------------------------------

    def scan_config_text(self, config_text: str, context: str = "config") -> list[Finding]:
        """Credential scan over one configuration blob, audited."""
        findings = sort_findings(self.policy.effective(scan_config_credentials(config_text, self.lexicon)))
        self._audit_findings(findings, context=context)
        self.audit.append(
            EventKind.CONFIG_CHANGE,
            {"action": "credential_scan", "context": context, "findings": len(findings)},
        )
        return findings

    def check_drift(self, live_config: Any, baseline: Any | None = None, context: str = "config") -> list[Finding]:
        """Deep-diff live settings against the canonical baseline, audited."""
        if baseline is None:
            if not self.policy.baseline_config_path:
                raise GatewayError("no baseline config available for drift check")
            import json as _json

            baseline = _json.loads(Path(self.policy.baseline_config_path).read_text(encoding="utf-8"))
        findings = sort_findings(self.policy.effective(check_config_drift(baseline, live_config)))
        self._audit_findings(findings, context=context)
        self.audit.append(
            EventKind.CONFIG_CHANGE,
            {"action": "drift_check", "context": context, "findings": len(findings)},
        )
        return findings

    def verify_audit_log(self):
        return verify_audit(self.policy.audit_log_path)


_PATH_PARAM_RE = re.compile(r"(path|file|dir|dest|destination|src|source|target|name)", re.IGNORECASE)
_SQL_PARAM_RE = re.compile(r"(sql|query|statement)", re.IGNORECASE)


def _looks_like_path_param(param: str) -> bool:
    return bool(_PATH_PARAM_RE.search(param))


def _looks_like_sql_param(param: str) -> bool:
    return bool(_SQL_PARAM_RE.search(param))
