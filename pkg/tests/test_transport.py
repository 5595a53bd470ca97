"""Transports: loopback dispatch, stdio subprocess framing, server loop."""

from __future__ import annotations

import io
import subprocess
import sys

import pytest

from toolgate.protocol import (
    LoopbackChannel,
    McpClient,
    MessageKind,
    StdioProcessChannel,
    TransportError,
    decode_message,
    encode_message,
    notification,
    request,
    response,
    serve_lines,
)


def _echo_handler(message):
    if message.kind is MessageKind.REQUEST:
        return response(message.id, {"echo": message.params})
    return None


def test_loopback_round_trip():
    channel = LoopbackChannel(_echo_handler)
    channel.send(request(1, "x", {"v": 1}))
    reply = channel.receive()
    assert reply.result == {"echo": {"v": 1}}


def test_loopback_notifications_produce_no_reply():
    channel = LoopbackChannel(_echo_handler)
    channel.send(notification("notifications/progress"))
    with pytest.raises(TransportError):
        channel.receive()


def test_loopback_closed_channel_raises():
    channel = LoopbackChannel(_echo_handler)
    channel.close()
    with pytest.raises(TransportError):
        channel.send(request(1, "x"))


def test_serve_lines_handles_parse_and_protocol_errors():
    reader = [
        b'{"jsonrpc":',  # parse error
        b'{"jsonrpc":"2.0"}',  # protocol error
        encode_message(request(3, "ping")),
    ]
    out = io.BytesIO()
    serve_lines(lambda m: response(m.id, "pong"), iter(reader), out)
    lines = out.getvalue().splitlines()
    assert len(lines) == 3
    assert decode_message(lines[0]).error.code == -32700
    assert decode_message(lines[1]).error.code == -32600
    assert decode_message(lines[2]).result == "pong"


def test_serve_lines_turns_handler_crash_into_internal_error():
    def boom(message):
        raise RuntimeError("kaput")

    out = io.BytesIO()
    serve_lines(boom, iter([encode_message(request(1, "x"))]), out)
    reply = decode_message(out.getvalue())
    assert reply.error.code == -32603


def test_stdio_subprocess_server_end_to_end():
    channel = StdioProcessChannel([sys.executable, "-m", "toolgate.corpus.serve", "calc-tools"])
    try:
        client = McpClient(channel)
        info, caps = client.initialize()
        assert caps.tools is True
        tools = client.list_tools()
        assert [t.name for t in tools] == ["add"]
        result = client.call_tool("add", {"a": 5, "b": 1})
        assert result.text == "6"
    finally:
        channel.close()


def test_stdio_channel_closed_peer_raises_transport_error():
    proc_channel = StdioProcessChannel([sys.executable, "-c", "pass"])
    try:
        with pytest.raises(TransportError):
            proc_channel.receive()
    finally:
        proc_channel.close()
