"""Scripted MCP servers: benign and malicious corpus actors.

Each server speaks real JSON-RPC through its ``handle`` method, so the
same object can sit behind a loopback channel, a stdio loop, or the SSE
server. Malicious ones record every request they receive and every
payload they would exfiltrate; a scenario passes or fails on what those
recorders captured.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random
from typing import Any, Callable

from ..gateway.sessions import VirtualClock
from ..protocol.client import PROTOCOL_VERSION
from ..protocol.messages import MessageKind, RpcMessage, error_response, response
from ..protocol.tools import ToolDescriptor, descriptor_to_wire
from ..registry.manifest import ServerManifest


class Recorder:
    """What a (possibly malicious) server saw and what it would leak."""

    def __init__(self, malicious: bool = False) -> None:
        self.malicious = malicious
        self.requests: list[dict[str, Any]] = []
        self.exfiltrated: list[str] = []

    def record_request(self, method: str, params: Any, session_id: str | None = None) -> None:
        self.requests.append({"method": method, "params": params, "session_id": session_id})

    def record_exfil(self, payload: str) -> None:
        self.exfiltrated.append(payload)

    def captured(self, marker: str) -> bool:
        if any(marker in payload for payload in self.exfiltrated):
            return True
        return marker in json.dumps(self.requests, ensure_ascii=False, default=str)

    def request_bodies(self) -> str:
        return json.dumps(self.requests, ensure_ascii=False, default=str)


@dataclass
class CorpusEnv:
    """Mutable world one scenario run lives in."""

    clock: VirtualClock = field(default_factory=VirtualClock)
    rng: Random = field(default_factory=lambda: Random(0))
    fs: dict[str, str] = field(default_factory=dict)
    sinks: dict[str, Recorder] = field(default_factory=dict)
    recorders: dict[str, Recorder] = field(default_factory=dict)
    configs: dict[str, str] = field(default_factory=dict)
    live_config: dict[str, Any] = field(default_factory=dict)
    baseline_config: dict[str, Any] = field(default_factory=dict)

    def sink(self, url: str) -> Recorder:
        """Attacker-side collector; anything it records counts as exfiltrated."""
        return self.sinks.setdefault(url, Recorder(malicious=True))

    def recorder(self, server_name: str, malicious: bool = False) -> Recorder:
        record = self.recorders.setdefault(server_name, Recorder())
        if malicious:
            record.malicious = True
        return record

    def malicious_recorders(self) -> list[Recorder]:
        return [r for r in self.recorders.values() if r.malicious] + list(self.sinks.values())

    def captured(self, marker: str) -> bool:
        """Did the planted secret reach any attacker-controlled recorder?"""
        return any(r.captured(marker) for r in self.malicious_recorders())


class ToolFailure(Exception):
    """A scripted tool reporting a server-side error."""

    def __init__(self, message: str, code: int = -32000):
        super().__init__(message)
        self.code = code


ToolFn = Callable[[dict[str, Any]], Any]


@dataclass
class ToolSpec:
    descriptor: ToolDescriptor
    fn: ToolFn


class ScriptedServer:
    """Minimal MCP server driven by plain Python callables."""

    def __init__(
        self,
        name: str,
        version: str,
        tools: list[ToolSpec],
        recorder: Recorder | None = None,
        protocol_version: str = PROTOCOL_VERSION,
    ):
        self.name = name
        self.version = version
        self.tools = {spec.descriptor.name: spec for spec in tools}
        self.tool_order = [spec.descriptor.name for spec in tools]
        self.recorder = recorder
        self.protocol_version = protocol_version

    def descriptors(self) -> list[ToolDescriptor]:
        return [self.tools[name].descriptor for name in self.tool_order]

    def handle(self, message: RpcMessage, session_id: str | None = None) -> RpcMessage | None:
        if self.recorder is not None and message.method is not None:
            self.recorder.record_request(message.method, message.params, session_id)
        if message.kind is MessageKind.NOTIFICATION:
            return None
        if message.kind is not MessageKind.REQUEST:
            return None
        method = message.method or ""
        if method == "initialize":
            return response(
                message.id,
                {
                    "protocolVersion": self.protocol_version,
                    "serverInfo": {"name": self.name, "version": self.version},
                    "capabilities": {"tools": {}},
                },
            )
        if method == "tools/list":
            return response(message.id, {"tools": [descriptor_to_wire(d) for d in self.descriptors()]})
        if method == "tools/call":
            params = message.params if isinstance(message.params, dict) else {}
            name = params.get("name", "")
            args = params.get("arguments") or {}
            spec = self.tools.get(name)
            if spec is None:
                return error_response(message.id, -32601, f"unknown tool: {name}")
            missing = [
                p
                for p in spec.descriptor.input_schema.get("required", [])
                if p not in args
            ]
            if missing:
                return error_response(message.id, -32602, f"missing required parameters: {missing}")
            try:
                value = spec.fn(args)
            except ToolFailure as exc:
                return error_response(message.id, exc.code, str(exc))
            if isinstance(value, dict):
                return response(message.id, value)
            return response(message.id, {"content": [{"type": "text", "text": str(value)}]})
        return error_response(message.id, -32601, f"method not found: {method}")


def text_result(text: str) -> dict[str, Any]:
    return {"content": [{"type": "text", "text": text}]}


def make_manifest(
    server: ScriptedServer,
    namespace: str,
    description: str = "",
    checksum: str | None = None,
    signature: bytes | None = None,
    publisher_key_id: str | None = None,
    tool_categories: dict[str, str] | None = None,
) -> ServerManifest:
    return ServerManifest(
        namespace=namespace,
        display_name=server.name,
        version=server.version,
        description=description,
        protocol_version=server.protocol_version,
        tools=tuple(server.descriptors()),
        checksum=checksum,
        signature=signature,
        publisher_key_id=publisher_key_id,
        tool_categories=dict(tool_categories or {}),
    )
