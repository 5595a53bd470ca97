"""SSE transport: HTTP GET /sse event stream plus POSTed JSON-RPC.

Connecting clients receive an ``endpoint`` event naming the POST path and
a fresh session id; every subsequent tool message is POSTed to
``{message_path}?session_id=<id>`` and the matching response arrives as a
``message`` event on the stream. The framing here is the test surface:
exactly ``event: <name>\\ndata: <payload>\\n\\n`` per event.

The server intentionally accepts any POST naming a known session id,
whether or not it came from the client holding the stream. That is the
session-replay hole a fronting gateway has to close; this corpus server
reproduces it faithfully.
"""

from __future__ import annotations

import http.client
import queue
import secrets
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable
from urllib.parse import parse_qs, urlparse

from .messages import MessageError, RpcMessage, decode_message, encode_message
from .transport import Channel, TransportError

DEFAULT_SSE_PORT = 8000
DEFAULT_MESSAGE_PATH = "/messages/"


class MalformedEndpointEvent(Exception):
    """The first stream event did not carry a usable endpoint + session id."""


@dataclass(frozen=True)
class SseEndpoint:
    """Where a connected SSE client must POST its messages."""

    base_url: str
    session_id: str
    message_path: str = DEFAULT_MESSAGE_PATH


def format_event(name: str, payload: str) -> bytes:
    return f"event: {name}\ndata: {payload}\n\n".encode("utf-8")


class _SessionStream:
    def __init__(self) -> None:
        self.outbox: "queue.Queue[bytes | None]" = queue.Queue()


class SseServer:
    """Threaded SSE server bridging HTTP to a JSON-RPC message handler.

    ``handler(message, session_id)`` returns the response message (or None
    for notifications). One stream per /sse connect; POSTs are routed by
    the session_id query parameter alone.
    """

    def __init__(
        self,
        handler: Callable[[RpcMessage, str], RpcMessage | None],
        host: str = "127.0.0.1",
        port: int = 0,
        message_path: str = DEFAULT_MESSAGE_PATH,
        session_id_factory: Callable[[], str] | None = None,
    ):
        if not message_path.startswith("/"):
            raise ValueError("message_path must begin with '/'")
        self.handler = handler
        self.message_path = message_path
        self._new_session_id = session_id_factory or (lambda: secrets.token_hex(16))
        self._sessions: dict[str, _SessionStream] = {}
        self._lock = threading.Lock()
        self._stopping = threading.Event()

        server = self

        class _Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt: str, *args: Any) -> None:  # quiet tests
                pass

            def do_GET(self) -> None:
                if urlparse(self.path).path != "/sse":
                    self.send_error(404)
                    return
                session_id = server._register_session()
                stream = server._sessions[session_id]
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.end_headers()
                try:
                    self.wfile.write(
                        format_event("endpoint", f"{server.message_path}?session_id={session_id}")
                    )
                    self.wfile.flush()
                    while not server._stopping.is_set():
                        try:
                            chunk = stream.outbox.get(timeout=0.1)
                        except queue.Empty:
                            continue
                        if chunk is None:
                            break
                        self.wfile.write(chunk)
                        self.wfile.flush()
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def do_POST(self) -> None:
                parsed = urlparse(self.path)
                if parsed.path != server.message_path.rstrip("/") and parsed.path != server.message_path:
                    self.send_error(404)
                    return
                session_id = (parse_qs(parsed.query).get("session_id") or [""])[0]
                stream = server._sessions.get(session_id)
                if stream is None:
                    self.send_error(403, "unknown session_id")
                    return
                length = int(self.headers.get("Content-Length", "0"))
                body = self.rfile.read(length)
                try:
                    message = decode_message(body)
                except MessageError:
                    self.send_error(400, "not a JSON-RPC message")
                    return
                reply = server.handler(message, session_id)
                if reply is not None:
                    line = encode_message(reply).rstrip(b"\n")
                    stream.outbox.put(format_event("message", line.decode("utf-8")))
                self.send_response(202)
                self.send_header("Content-Type", "text/plain")
                self.send_header("Content-Length", "8")
                self.end_headers()
                self.wfile.write(b"Accepted")

        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.daemon_threads = True
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    def _register_session(self) -> str:
        with self._lock:
            session_id = self._new_session_id()
            self._sessions[session_id] = _SessionStream()
            return session_id

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "SseServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        with self._lock:
            for stream in self._sessions.values():
                stream.outbox.put(None)
        self._httpd.shutdown()
        self._httpd.server_close()


def _read_event(stream: Any) -> tuple[str, str]:
    """Read one SSE event (name, data) from a line-oriented byte stream."""
    name = ""
    data_lines: list[str] = []
    saw_field = False
    while True:
        raw = stream.readline()
        if not raw:
            raise TransportError("SSE stream closed")
        line = raw.decode("utf-8").rstrip("\r\n")
        if line == "":
            if saw_field:
                return name, "\n".join(data_lines)
            continue
        saw_field = True
        if line.startswith("event:"):
            name = line[len("event:"):].strip()
        elif line.startswith("data:"):
            data_lines.append(line[len("data:"):].strip())


class SseChannel(Channel):
    """Client channel over one SSE stream plus per-message POSTs."""

    def __init__(self, base_url: str, timeout: float = 10.0):
        self._base_url = base_url.rstrip("/")
        self._timeout = timeout
        parsed = urlparse(self._base_url)
        self._netloc = parsed.netloc
        self._stream_conn = http.client.HTTPConnection(self._netloc, timeout=timeout)
        try:
            self._stream_conn.request("GET", "/sse")
            self._response = self._stream_conn.getresponse()
        except OSError as exc:
            raise TransportError(f"SSE connect failed: {exc}") from exc
        if self._response.status != 200:
            raise TransportError(f"SSE connect failed: HTTP {self._response.status}")
        self.endpoint = self._parse_endpoint_event()

    def _parse_endpoint_event(self) -> SseEndpoint:
        name, data = _read_event(self._response)
        if name != "endpoint":
            raise MalformedEndpointEvent(f"first event is {name!r}, expected 'endpoint'")
        parsed = urlparse(data)
        session_id = (parse_qs(parsed.query).get("session_id") or [""])[0]
        if not session_id:
            raise MalformedEndpointEvent("endpoint event carries no session_id")
        message_path = parsed.path or DEFAULT_MESSAGE_PATH
        if not message_path.startswith("/"):
            raise MalformedEndpointEvent(f"message path {message_path!r} is not absolute")
        return SseEndpoint(base_url=self._base_url, session_id=session_id, message_path=message_path)

    def send(self, message: RpcMessage) -> None:
        body = encode_message(message)
        conn = http.client.HTTPConnection(self._netloc, timeout=self._timeout)
        try:
            conn.request(
                "POST",
                f"{self.endpoint.message_path}?session_id={self.endpoint.session_id}",
                body=body,
                headers={"Content-Type": "application/json"},
            )
            status = conn.getresponse().status
        except OSError as exc:
            raise TransportError(f"POST failed: {exc}") from exc
        finally:
            conn.close()
        if status >= 300:
            raise TransportError(f"POST rejected: HTTP {status}")

    def receive(self) -> RpcMessage:
        while True:
            name, data = _read_event(self._response)
            if name == "message":
                return decode_message(data)

    def close(self) -> None:
        try:
            self._stream_conn.close()
        except OSError:  # pragma: no cover
            pass


def sse_connect(base_url: str, timeout: float = 10.0) -> SseChannel:
    """Open the /sse stream and wait for the endpoint event.

    No message can be sent before this returns: the channel only exists
    once the endpoint event has named the session.
    """
    return SseChannel(base_url, timeout=timeout)
