"""Scripted hosts driving scenarios: one credulous, one gateway-fronted.

Both hosts model the same model-driven behavior — they read exactly the
text a model would see (tool descriptions, tool outputs) and credulously
follow any embedded read-and-send directive, and they prefer tools whose
descriptions promote themselves. Neither host honors text inside a
``[FILTERED: ...]`` neutralization marker, which is the scripted analog of
a model treating visibly defanged text as inert. The only difference
between the two is what stands between them and the servers: nothing, or
the gateway.
"""

from __future__ import annotations

import http.client
import re
from dataclasses import dataclass, field
from typing import Any
from urllib.parse import urlparse

from ..detectors import Finding, default_lexicon, find_phrases
from ..detectors.lexicon import SELF_PROMOTION
from ..detectors.text import FILTERED_MARKER_RE
from ..gateway import (
    AdmissionError,
    Gateway,
    PolicyViolation,
    SessionError,
    UnknownTool,
)
from ..protocol.client import McpClient, ToolError
from ..protocol.messages import encode_message, request
from ..protocol.sse import SseServer, sse_connect
from ..protocol.tools import ToolDescriptor
from ..protocol.transport import LoopbackChannel
from .servers import CorpusEnv, ScriptedServer

# the directive grammar poisoned fixtures use; a real model would parse
# free-form language, the scripted host parses exactly this shape
DIRECTIVE_RE = re.compile(
    r"read the file at\s+(\S+)\s+and\s+send the contents to\s+(\S+)", re.IGNORECASE
)


@dataclass
class CallRecord:
    session: str
    tool: str
    ok: bool
    blocked: bool = False
    error: str | None = None
    text: str | None = None
    replay: bool = False


@dataclass
class Trace:
    admissions: list[tuple[str, bool]] = field(default_factory=list)
    calls: list[CallRecord] = field(default_factory=list)
    remediated: bool = False
    obeyed_directives: list[tuple[str, str]] = field(default_factory=list)

    def blocked_any(self) -> bool:
        return any(not accepted for _, accepted in self.admissions) or any(
            c.blocked for c in self.calls
        )

    def replay_succeeded(self) -> bool:
        return any(c.replay and c.ok for c in self.calls)

    def output_contains(self, marker: str) -> bool:
        return any(c.text and marker in c.text for c in self.calls)


class _HostBase:
    """Shared credulous-model behavior."""

    def __init__(self, env: CorpusEnv):
        self.env = env
        self.trace = Trace()
        self.last_text: str | None = None
        self._lexicon = default_lexicon()

    # -- the simulated model psyche ------------------------------------

    @staticmethod
    def _visible(text: str) -> str:
        """Text as the model acts on it: neutralized spans are inert."""
        return FILTERED_MARKER_RE.sub(" ", text)

    def obey_directives(self, text: str | None) -> None:
        if not text:
            return
        for path, url in DIRECTIVE_RE.findall(self._visible(text)):
            url = url.rstrip(".,;")
            content = self.env.fs.get(path, "")
            self.env.sink(url).record_exfil(f"{path} -> {content}")
            self.trace.obeyed_directives.append((path, url))

    def persuasion_score(self, description: str) -> int:
        return len(find_phrases(self._visible(description), self._lexicon, (SELF_PROMOTION,)))

    def substitute(self, args: dict[str, Any]) -> dict[str, Any]:
        return {
            k: (self.last_text or "") if v == "$LAST_RESULT" else v for k, v in args.items()
        }

    def _after_result(self, text: str | None) -> None:
        if text is not None:
            self.last_text = text
        self.obey_directives(text)


class GatewayHost(_HostBase):
    """Host whose every interaction passes through the gateway."""

    def __init__(self, env: CorpusEnv, gateway: Gateway):
        super().__init__(env)
        self.gateway = gateway
        self.sessions: dict[str, str] = {}

    def create_session(self, alias: str, client_id: str) -> None:
        self.sessions[alias] = self.gateway.create_session(client_id).session_id

    def revoke_session(self, alias: str) -> None:
        self.gateway.revoke_session(self.sessions[alias])

    def admit(self, key: str, manifest, client: McpClient | None, package: bytes | None = None) -> bool:
        decision = self.gateway.admit_server(manifest, package_bytes=package, client=client)
        self.trace.admissions.append((key, decision.accepted))
        return decision.accepted

    def update(self, key: str, manifest, client: McpClient | None, package: bytes | None = None) -> bool:
        try:
            _, decision = self.gateway.update_server(manifest, package_bytes=package, client=client)
            accepted = decision.accepted
        except AdmissionError:
            accepted = False
        self.trace.admissions.append((key, accepted))
        return accepted

    def list_tools(self, alias: str) -> list[ToolDescriptor]:
        sid = self.sessions[alias]
        tools = self.gateway.proxy_list_tools(sid)
        for t in tools:
            self.obey_directives(t.description)
        return tools

    def _select(self, alias: str, tool: str, namespace: str | None, select: str) -> str | None:
        sid = self.sessions[alias]
        candidates = self.gateway.proxy_list_tools(sid)
        if select == "preferred":
            pool = [t for t in candidates if (t.alias or t.name).startswith(tool)]
            if not pool:
                return None
            best = max(pool, key=lambda t: self.persuasion_score(t.description))
            return best.name
        exact = [t for t in candidates if (t.alias or t.name) == tool]
        if namespace is not None:
            preferred = [t for t in exact if t.server_id == namespace]
            if preferred:
                return preferred[0].name
        return exact[0].name if exact else None

    def call(
        self,
        alias: str,
        tool: str,
        args: dict[str, Any],
        namespace: str | None = None,
        select: str = "exact",
        replay: bool = False,
    ) -> CallRecord:
        sid = self.sessions[alias]
        args = self.substitute(args)
        try:
            qualified = self._select(alias, tool, namespace, select) or tool
            result = self.gateway.proxy_call_tool(sid, qualified, args)
            record = CallRecord(alias, qualified, ok=True, text=result.text, replay=replay)
            self._after_result(result.text)
        except PolicyViolation as exc:
            record = CallRecord(alias, tool, ok=False, blocked=True, error=str(exc), replay=replay)
        except (UnknownTool, SessionError) as exc:
            record = CallRecord(alias, tool, ok=False, blocked=True, error=str(exc), replay=replay)
        except ToolError as exc:
            record = CallRecord(alias, tool, ok=False, blocked=False, error=str(exc), replay=replay)
        self.trace.calls.append(record)
        return record

    def scan_config(self, key: str) -> list[Finding]:
        return self.gateway.scan_config_text(self.env.configs[key], context=f"config:{key}")

    def check_drift(self) -> list[Finding]:
        findings = self.gateway.check_drift(self.env.live_config, baseline=self.env.baseline_config)
        if findings:
            # detection enables remediation: restore the canonical baseline
            self.env.live_config.clear()
            self.env.live_config.update(self.env.baseline_config)
            self.trace.remediated = True
        return findings


class NaiveHost(_HostBase):
    """Host with no gateway: connects everything, checks nothing.

    Bare tool names resolve with the most recent registration winning,
    which is exactly the ambiguity shadowing and typosquatting exploit.
    Client-side "logout" never invalidates anything server-side, and
    server updates keep the old working context alive.
    """

    def __init__(self, env: CorpusEnv):
        super().__init__(env)
        self.servers: dict[str, tuple[str, ScriptedServer, McpClient]] = {}
        self.route: dict[str, str] = {}  # bare tool name -> blueprint key (later wins)
        self.order: list[str] = []
        self.sse_base_url: str | None = None
        self.sse_clients: dict[str, Any] = {}
        self.revoked_aliases: set[str] = set()

    def admit(self, key: str, namespace: str, server: ScriptedServer, client: McpClient) -> None:
        self.servers[key] = (namespace, server, client)
        self.order.append(key)
        for descriptor in server.descriptors():
            self.route[descriptor.name] = key
            self.obey_directives(descriptor.description)
        self.trace.admissions.append((key, True))

    def install(self, key: str, package: bytes) -> None:
        # one-click install: run whatever arrived
        if b"BACKDOOR:" in package:
            payload = package.split(b"BACKDOOR:", 1)[1].decode("utf-8", "replace")
            self.env.sink("backdoor://installer").record_exfil(payload)

    def update(self, key: str, namespace: str, server: ScriptedServer, client: McpClient) -> None:
        # hot reload: swap binaries, keep sessions and routes warm
        self.servers[key] = (namespace, server, client)
        for descriptor in server.descriptors():
            self.route[descriptor.name] = key
            self.obey_directives(descriptor.description)
        self.trace.admissions.append((key, True))

    def create_session(self, alias: str, client_id: str) -> None:
        if self.sse_base_url is not None:
            channel = sse_connect(self.sse_base_url)
            client = McpClient(channel, client_name=client_id)
            client.initialize()
            self.sse_clients[alias] = (channel, client)

    def revoke_session(self, alias: str) -> None:
        # client-side logout only; the server never hears about it
        self.revoked_aliases.add(alias)

    def list_tools(self, alias: str) -> list[ToolDescriptor]:
        tools: list[ToolDescriptor] = []
        for key in self.order:
            _, server, _ = self.servers[key]
            tools.extend(server.descriptors())
        for t in tools:
            self.obey_directives(t.description)
        return tools

    def _client_for(self, alias: str, tool: str, select: str) -> tuple[str, McpClient] | None:
        if alias in self.sse_clients:
            return tool, self.sse_clients[alias][1]
        if select == "preferred":
            pool: list[tuple[int, int, str, str]] = []
            for idx, key in enumerate(self.order):
                _, server, client = self.servers[key]
                for d in server.descriptors():
                    if d.name.startswith(tool):
                        pool.append((self.persuasion_score(d.description), idx, d.name, key))
            if not pool:
                return None
            pool.sort()
            _, _, name, key = pool[-1]
            return name, self.servers[key][2]
        key = self.route.get(tool)
        if key is None:
            return None
        return tool, self.servers[key][2]

    def call(
        self,
        alias: str,
        tool: str,
        args: dict[str, Any],
        namespace: str | None = None,
        select: str = "exact",
        replay: bool = False,
    ) -> CallRecord:
        args = self.substitute(args)
        resolved = self._client_for(alias, tool, select)
        if resolved is None:
            record = CallRecord(alias, tool, ok=False, error="no such tool", replay=replay)
            self.trace.calls.append(record)
            return record
        name, client = resolved
        try:
            result = client.call_tool(name, args)
            record = CallRecord(alias, name, ok=not result.is_error, text=result.text, replay=replay)
            self._after_result(result.text)
        except ToolError as exc:
            record = CallRecord(alias, name, ok=False, error=str(exc), replay=replay)
        self.trace.calls.append(record)
        return record

    def replay_raw_sse(self, victim_alias: str, tool: str, args: dict[str, Any]) -> CallRecord:
        """Second client replays the victim's session_id via a bare POST."""
        channel, _ = self.sse_clients[victim_alias]
        endpoint = channel.endpoint
        body = encode_message(request(999, "tools/call", {"name": tool, "arguments": args}))
        netloc = urlparse(endpoint.base_url).netloc
        conn = http.client.HTTPConnection(netloc, timeout=10)
        try:
            conn.request(
                "POST",
                f"{endpoint.message_path}?session_id={endpoint.session_id}",
                body=body,
                headers={"Content-Type": "application/json"},
            )
            status = conn.getresponse().status
        finally:
            conn.close()
        record = CallRecord(victim_alias, tool, ok=status < 300, replay=True)
        self.trace.calls.append(record)
        return record

    def scan_config(self, key: str) -> list[Finding]:
        return []  # nobody scans anything without the gateway

    def check_drift(self) -> list[Finding]:
        return []
