"""Transport channels carrying newline-delimited JSON-RPC.

A channel is lock-step: one in-flight request at a time. Concurrency
happens across channels, never within one. Stdout of a stdio server is
the protocol stream; anything diagnostic belongs on stderr.
"""

from __future__ import annotations

import subprocess
from collections import deque
from typing import Any, BinaryIO, Callable, Iterable

from .messages import (
    MessageKind,
    ParseError,
    ProtocolError,
    RpcMessage,
    decode_message,
    encode_message,
    error_response,
)


class TransportError(Exception):
    """The underlying byte channel failed or closed mid-exchange."""


class Channel:
    """Bidirectional message channel (abstract)."""

    def send(self, message: RpcMessage) -> None:
        raise NotImplementedError

    def receive(self) -> RpcMessage:
        raise NotImplementedError

    def close(self) -> None:  # pragma: no cover - overridden where meaningful
        pass

    def __enter__(self) -> "Channel":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


class LineChannel(Channel):
    """Channel over a pair of binary streams (one JSON-RPC line per message)."""

    def __init__(self, reader: BinaryIO, writer: BinaryIO):
        self._reader = reader
        self._writer = writer

    def send(self, message: RpcMessage) -> None:
        try:
            self._writer.write(encode_message(message))
            self._writer.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise TransportError(f"write failed: {exc}") from exc

    def receive(self) -> RpcMessage:
        try:
            line = self._reader.readline()
        except (ValueError, OSError) as exc:
            raise TransportError(f"read failed: {exc}") from exc
        if not line:
            raise TransportError("channel closed by peer")
        return decode_message(line)

    def close(self) -> None:
        for stream in (self._writer, self._reader):
            try:
                stream.close()
            except OSError:  # pragma: no cover - best effort
                pass


class StdioProcessChannel(Channel):
    """Channel to a subprocess speaking the stdio framing."""

    def __init__(self, command: list[str], env: dict[str, str] | None = None):
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            env=env,
        )
        assert self._proc.stdin is not None and self._proc.stdout is not None
        self._line = LineChannel(self._proc.stdout, self._proc.stdin)

    def send(self, message: RpcMessage) -> None:
        self._line.send(message)

    def receive(self) -> RpcMessage:
        return self._line.receive()

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:  # pragma: no cover - stuck child
                self._proc.kill()
                self._proc.wait(timeout=5)
        self._line.close()


class LoopbackChannel(Channel):
    """In-memory channel dispatching synchronously to a message handler.

    The handler is invoked inline on ``send``; any response it returns is
    queued for the next ``receive``. Deterministic by construction, which
    keeps scenario replays free of timing effects.
    """

    def __init__(self, handler: Callable[[RpcMessage], RpcMessage | None]):
        self._handler = handler
        self._inbox: deque[RpcMessage] = deque()
        self._closed = False

    def send(self, message: RpcMessage) -> None:
        if self._closed:
            raise TransportError("channel closed")
        reply = self._handler(message)
        if reply is not None:
            self._inbox.append(reply)

    def receive(self) -> RpcMessage:
        if self._closed:
            raise TransportError("channel closed")
        if not self._inbox:
            raise TransportError("no pending message on loopback channel")
        return self._inbox.popleft()

    def close(self) -> None:
        self._closed = True


def serve_lines(
    handler: Callable[[RpcMessage], RpcMessage | None],
    reader: Iterable[bytes],
    writer: BinaryIO,
) -> None:
    """Serve newline-delimited JSON-RPC from ``reader`` until EOF.

    Undecodable input yields a JSON-RPC error response instead of killing
    the loop; handler exceptions surface as internal errors.
    """
    for raw in reader:
        if not raw.strip():
            continue
        try:
            message = decode_message(raw)
        except ParseError:
            writer.write(encode_message(error_response(0, -32700, "parse error")))
            writer.flush()
            continue
        except ProtocolError:
            writer.write(encode_message(error_response(0, -32600, "invalid request")))
            writer.flush()
            continue
        try:
            reply = handler(message)
        except Exception as exc:  # noqa: BLE001 - server loop must not die
            if message.kind is MessageKind.REQUEST:
                reply = error_response(message.id, -32603, f"internal error: {exc}")
            else:
                reply = None
        if reply is not None:
            writer.write(encode_message(reply))
            writer.flush()
