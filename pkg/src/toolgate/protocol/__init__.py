"""MCP wire protocol: messages, transports, client operations."""

from .client import (
    Capabilities,
    ChannelStateError,
    HandshakeError,
    McpClient,
    PROTOCOL_VERSION,
    ServerInfo,
    ToolError,
    ToolResult,
)
from .messages import (
    MalformedMessage,
    MessageKind,
    ParseError,
    ProtocolError,
    RpcError,
    RpcMessage,
    decode_message,
    encode_message,
    error_response,
    notification,
    request,
    response,
)
from .sse import MalformedEndpointEvent, SseChannel, SseEndpoint, SseServer, sse_connect
from .tools import InvalidDescriptor, ToolDescriptor, descriptor_from_wire, descriptor_to_wire, qualify, schema_for
from .transport import Channel, LineChannel, LoopbackChannel, StdioProcessChannel, TransportError, serve_lines

__all__ = [
    "Capabilities",
    "Channel",
    "ChannelStateError",
    "HandshakeError",
    "InvalidDescriptor",
    "LineChannel",
    "LoopbackChannel",
    "MalformedEndpointEvent",
    "MalformedMessage",
    "McpClient",
    "MessageKind",
    "PROTOCOL_VERSION",
    "ParseError",
    "ProtocolError",
    "RpcError",
    "RpcMessage",
    "ServerInfo",
    "SseChannel",
    "SseEndpoint",
    "SseServer",
    "StdioProcessChannel",
    "ToolDescriptor",
    "ToolError",
    "ToolResult",
    "TransportError",
    "decode_message",
    "descriptor_from_wire",
    "descriptor_to_wire",
    "encode_message",
    "error_response",
    "notification",
    "qualify",
    "request",
    "response",
    "schema_for",
    "serve_lines",
    "sse_connect",
]
