"""Client-side MCP operations: handshake, tool listing, tool invocation.

The client pins one protocol version; a server advertising anything else
fails the handshake rather than guessing at negotiation semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .messages import MessageKind, RpcMessage, notification, request
from .tools import ToolDescriptor, descriptor_from_wire
from .transport import Channel, TransportError

PROTOCOL_VERSION = "2024-11-05"


class HandshakeError(Exception):
    """Initialize failed: malformed or incomplete server response."""


class VersionMismatch(HandshakeError):
    """Server speaks an unsupported protocol version."""


class ChannelStateError(Exception):
    """Operation violates the channel lifecycle (e.g. double initialize)."""


class ToolError(Exception):
    """Server-side tool failure, passed through verbatim."""

    def __init__(self, code: int, message: str, data: Any = None):
        super().__init__(message)
        self.code = code
        self.data = data


@dataclass(frozen=True)
class ServerInfo:
    name: str
    version: str


@dataclass(frozen=True)
class Capabilities:
    tools: bool
    resources: bool
    prompts: bool
    protocol_version: str


@dataclass(frozen=True)
class ToolResult:
    """Result of one tool call: raw result value plus extracted text."""

    raw: Any
    text: str | None = None
    is_error: bool = False


def result_text(raw: Any) -> str | None:
    """Join the text items of an MCP-style content list, if any."""
    if not isinstance(raw, dict):
        return None
    content = raw.get("content")
    if not isinstance(content, list):
        return None
    parts = [
        item.get("text")
        for item in content
        if isinstance(item, dict) and item.get("type") == "text" and isinstance(item.get("text"), str)
    ]
    return "".join(parts) if parts else None


class McpClient:
    """Lock-step MCP client over any Channel."""

    def __init__(self, channel: Channel, client_name: str = "toolgate", client_version: str = "0.1.0"):
        self._channel = channel
        self._client_name = client_name
        self._client_version = client_version
        self._next_id = 0
        self._ready = False
        self.server_info: ServerInfo | None = None
        self.capabilities: Capabilities | None = None

    @property
    def ready(self) -> bool:
        return self._ready

    def _call(self, method: str, params: Any = None) -> RpcMessage:
        self._next_id += 1
        self._channel.send(request(self._next_id, method, params))
        reply = self._channel.receive()
        # lock-step channel: skip any interleaved notifications
        while reply.kind is MessageKind.NOTIFICATION:
            reply = self._channel.receive()
        if reply.kind is not MessageKind.RESPONSE or reply.id != self._next_id:
            raise TransportError(f"out-of-order reply to {method}: {reply}")
        return reply

    def initialize(self) -> tuple[ServerInfo, Capabilities]:
        """Run the initialize handshake; marks the channel ready."""
        if self._ready:
            raise ChannelStateError("channel already initialized")
        reply = self._call(
            "initialize",
            {
                "protocolVersion": PROTOCOL_VERSION,
                "clientInfo": {"name": self._client_name, "version": self._client_version},
                "capabilities": {},
            },
        )
        if reply.error is not None:
            raise HandshakeError(f"initialize rejected: {reply.error.message}")
        result = reply.result
        if not isinstance(result, dict) or not isinstance(result.get("capabilities"), dict):
            raise HandshakeError("initialize response lacks capabilities")
        version = result.get("protocolVersion")
        if version != PROTOCOL_VERSION:
            raise VersionMismatch(f"server protocol version {version!r}, supported {PROTOCOL_VERSION!r}")
        info = result.get("serverInfo") or {}
        caps = result["capabilities"]
        self.server_info = ServerInfo(str(info.get("name", "")), str(info.get("version", "")))
        self.capabilities = Capabilities(
            tools="tools" in caps,
            resources="resources" in caps,
            prompts="prompts" in caps,
            protocol_version=str(version),
        )
        self._channel.send(notification("notifications/initialized"))
        self._ready = True
        return self.server_info, self.capabilities

    def _require_ready(self) -> None:
        if not self._ready:
            raise ChannelStateError("channel not initialized")

    def list_tools(self) -> list[ToolDescriptor]:
        """Return descriptors exactly as advertised (no mutation here)."""
        self._require_ready()
        reply = self._call("tools/list")
        if reply.error is not None:
            raise ToolError(reply.error.code, reply.error.message, reply.error.data)
        result = reply.result
        if not isinstance(result, dict) or not isinstance(result.get("tools"), list):
            raise TransportError("tools/list response lacks a tools array")
        return [descriptor_from_wire(obj) for obj in result["tools"]]

    def call_tool(self, name: str, args: dict[str, Any] | None = None) -> ToolResult:
        self._require_ready()
        if not name:
            raise ValueError("tool name must be non-empty")
        reply = self._call("tools/call", {"name": name, "arguments": args or {}})
        if reply.error is not None:
            raise ToolError(reply.error.code, reply.error.message, reply.error.data)
        raw = reply.result
        is_error = bool(raw.get("isError")) if isinstance(raw, dict) else False
        return ToolResult(raw=raw, text=result_text(raw), is_error=is_error)

    def close(self) -> None:
        self._channel.close()
