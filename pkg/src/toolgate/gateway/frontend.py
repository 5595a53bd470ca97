"""Upstream MCP surface of the gateway (stdio).

The gateway answers the host like any MCP server: initialize, tools/list,
tools/call. One upstream stdio connection maps to one gateway session,
created at initialize time from the advertised client name.
"""

from __future__ import annotations

from typing import Any, BinaryIO, Iterable

from ..protocol.client import PROTOCOL_VERSION, ToolError
from ..protocol.messages import MessageKind, RpcMessage, error_response, response
from ..protocol.tools import descriptor_to_wire
from ..protocol.transport import serve_lines
from .core import Gateway, PolicyViolation, UnknownTool
from .sessions import SessionError

POLICY_VIOLATION_CODE = -32010
UNKNOWN_TOOL_CODE = -32601
SESSION_ERROR_CODE = -32011


class GatewayFrontend:
    """Translates upstream JSON-RPC onto gateway operations."""

    def __init__(self, gateway: Gateway, server_name: str = "toolgate-gateway", server_version: str = "0.1.0"):
        self.gateway = gateway
        self.server_name = server_name
        self.server_version = server_version
        self.session_id: str | None = None

    def handle(self, message: RpcMessage) -> RpcMessage | None:
        if message.kind is MessageKind.NOTIFICATION:
            return None
        assert message.method is not None
        if message.method == "initialize":
            return self._initialize(message)
        if self.session_id is None:
            return error_response(message.id, SESSION_ERROR_CODE, "not initialized")
        if message.method == "tools/list":
            return self._list(message)
        if message.method == "tools/call":
            return self._call(message)
        return error_response(message.id, -32601, f"method not found: {message.method}")

    def _initialize(self, message: RpcMessage) -> RpcMessage:
        params = message.params if isinstance(message.params, dict) else {}
        client_info = params.get("clientInfo") or {}
        client_id = str(client_info.get("name", "upstream-host"))
        record = self.gateway.create_session(client_id)
        self.session_id = record.session_id
        return response(
            message.id,
            {
                "protocolVersion": PROTOCOL_VERSION,
                "serverInfo": {"name": self.server_name, "version": self.server_version},
                "capabilities": {"tools": {}},
            },
        )

    def _list(self, message: RpcMessage) -> RpcMessage:
        try:
            tools = self.gateway.proxy_list_tools(self.session_id or "")
        except SessionError as exc:
            return error_response(message.id, SESSION_ERROR_CODE, str(exc))
        return response(message.id, {"tools": [descriptor_to_wire(t) for t in tools]})

    def _call(self, message: RpcMessage) -> RpcMessage:
        params = message.params if isinstance(message.params, dict) else {}
        name = params.get("name", "")
        args = params.get("arguments") or {}
        try:
            result = self.gateway.proxy_call_tool(self.session_id or "", name, args)
        except PolicyViolation as exc:
            return error_response(
                message.id,
                POLICY_VIOLATION_CODE,
                str(exc),
                data={"code": exc.code, "findings": [f.to_json_obj() for f in exc.findings]},
            )
        except UnknownTool as exc:
            return error_response(message.id, UNKNOWN_TOOL_CODE, str(exc))
        except SessionError as exc:
            return error_response(message.id, SESSION_ERROR_CODE, str(exc))
        except ToolError as exc:
            return error_response(message.id, exc.code, str(exc), data=exc.data)
        raw: Any = result.raw if result.raw is not None else {"content": []}
        return response(message.id, raw)


def serve_gateway_stdio(gateway: Gateway, reader: Iterable[bytes], writer: BinaryIO) -> None:
    """Serve the gateway upstream over newline-delimited stdio until EOF."""
    frontend = GatewayFrontend(gateway)
    serve_lines(frontend.handle, reader, writer)
