"""JSON-RPC 2.0 message model and newline-delimited framing.

One message per line, UTF-8, LF-terminated. Decoding is strict about
JSON-RPC shape, but unknown top-level members are preserved on the message
and re-emitted verbatim: a security proxy must not silently drop fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

JSONRPC_VERSION = "2.0"

_STANDARD_MEMBERS = frozenset({"jsonrpc", "id", "method", "params", "result", "error"})


class MessageError(Exception):
    """Base class for message-layer failures."""


class MalformedMessage(MessageError):
    """A message violates the RpcMessage invariants and cannot be encoded."""


class ParseError(MessageError):
    """Input is not valid JSON."""


class ProtocolError(MessageError):
    """Input is valid JSON but not a valid JSON-RPC 2.0 message."""


class MessageKind(Enum):
    REQUEST = "request"
    RESPONSE = "response"
    NOTIFICATION = "notification"


@dataclass(frozen=True)
class RpcError:
    """JSON-RPC error object (code + message, optional data)."""

    code: int
    message: str
    data: Any = None


@dataclass(frozen=True, eq=True)
class RpcMessage:
    """One JSON-RPC 2.0 message.

    A Request has both ``id`` and ``method``; a Notification has ``method``
    and no id; a Response has ``id`` and exactly one of ``result``/``error``.
    ``extra`` holds unknown top-level members for verbatim re-emission.
    """

    kind: MessageKind
    id: Any = None
    method: str | None = None
    params: Any = None
    result: Any = None
    error: RpcError | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # dict is fine for comparison; freeze a copy so callers cannot mutate
        object.__setattr__(self, "extra", dict(self.extra))


def request(msg_id: Any, method: str, params: Any = None, **extra: Any) -> RpcMessage:
    return RpcMessage(MessageKind.REQUEST, id=msg_id, method=method, params=params, extra=extra)


def notification(method: str, params: Any = None, **extra: Any) -> RpcMessage:
    return RpcMessage(MessageKind.NOTIFICATION, method=method, params=params, extra=extra)


def response(msg_id: Any, result: Any = None, **extra: Any) -> RpcMessage:
    return RpcMessage(MessageKind.RESPONSE, id=msg_id, result=result, extra=extra)


def error_response(msg_id: Any, code: int, message: str, data: Any = None) -> RpcMessage:
    return RpcMessage(MessageKind.RESPONSE, id=msg_id, error=RpcError(code, message, data))


def validate_message(m: RpcMessage) -> None:
    """Raise MalformedMessage unless ``m`` satisfies the shape invariants."""
    if m.kind is MessageKind.REQUEST:
        if m.id is None or not m.method:
            raise MalformedMessage("request needs both id and method")
        if m.result is not None or m.error is not None:
            raise MalformedMessage("request must not carry result or error")
    elif m.kind is MessageKind.NOTIFICATION:
        if m.id is not None:
            raise MalformedMessage("notification must not carry an id")
        if not m.method:
            raise MalformedMessage("notification needs a method")
        if m.result is not None or m.error is not None:
            raise MalformedMessage("notification must not carry result or error")
    elif m.kind is MessageKind.RESPONSE:
        if m.id is None:
            raise MalformedMessage("response needs an id")
        if m.method is not None:
            raise MalformedMessage("response must not carry a method")
        if m.error is not None and m.result is not None:
            raise MalformedMessage("response carries both result and error")
    else:  # pragma: no cover - enum is closed
        raise MalformedMessage(f"unknown kind {m.kind!r}")
    if not isinstance(m.extra, dict) or any(k in _STANDARD_MEMBERS for k in m.extra):
        raise MalformedMessage("extra members must not shadow standard members")


def encode_message(m: RpcMessage) -> bytes:
    """Serialize one message as a single newline-terminated JSON-RPC line."""
    validate_message(m)
    obj: dict[str, Any] = {"jsonrpc": JSONRPC_VERSION}
    if m.kind is not MessageKind.NOTIFICATION:
        obj["id"] = m.id
    if m.method is not None:
        obj["method"] = m.method
    if m.params is not None:
        obj["params"] = m.params
    if m.kind is MessageKind.RESPONSE:
        if m.error is not None:
            err: dict[str, Any] = {"code": m.error.code, "message": m.error.message}
            if m.error.data is not None:
                err["data"] = m.error.data
            obj["error"] = err
        else:
            obj["result"] = m.result
    obj.update(m.extra)
    line = json.dumps(obj, ensure_ascii=False, separators=(",", ":"))
    if "\n" in line or "\r" in line:  # pragma: no cover - json escapes control chars
        raise MalformedMessage("encoded message contains a raw newline")
    return line.encode("utf-8") + b"\n"


def _parse_error_member(value: Any) -> RpcError:
    if not isinstance(value, dict):
        raise ProtocolError("error member must be an object")
    code = value.get("code")
    message = value.get("message")
    if not isinstance(code, int) or isinstance(code, bool) or not isinstance(message, str):
        raise ProtocolError("error object needs integer code and string message")
    return RpcError(code, message, value.get("data"))


def decode_message(data: bytes | str) -> RpcMessage:
    """Parse one complete line into an RpcMessage.

    Raises ParseError for invalid JSON and ProtocolError for valid JSON
    that is not a well-formed JSON-RPC 2.0 message.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("message must be a JSON object")
    if obj.get("jsonrpc") != JSONRPC_VERSION:
        raise ProtocolError("missing or unsupported jsonrpc version member")

    extra = {k: v for k, v in obj.items() if k not in _STANDARD_MEMBERS}
    msg_id = obj.get("id")
    method = obj.get("method")
    params = obj.get("params")

    if method is not None:
        if not isinstance(method, str) or not method:
            raise ProtocolError("method must be a non-empty string")
        if "result" in obj or "error" in obj:
            raise ProtocolError("request carries result or error member")
        if "id" in obj:
            if msg_id is None:
                raise ProtocolError("request id must not be null")
            return RpcMessage(MessageKind.REQUEST, id=msg_id, method=method, params=params, extra=extra)
        return RpcMessage(MessageKind.NOTIFICATION, method=method, params=params, extra=extra)

    if "id" not in obj or msg_id is None:
        raise ProtocolError("message has no method and no id")
    has_result = "result" in obj
    has_error = "error" in obj
    if has_result == has_error:
        raise ProtocolError("response needs exactly one of result/error")
    if has_error:
        return RpcMessage(MessageKind.RESPONSE, id=msg_id, error=_parse_error_member(obj["error"]), extra=extra)
    return RpcMessage(MessageKind.RESPONSE, id=msg_id, result=obj["result"], extra=extra)
