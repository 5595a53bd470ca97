"""Message codec: shapes, strict decoding, round-trip identity."""

from __future__ import annotations

import json
from random import Random

import pytest

from toolgate.protocol import (
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

# ---------------------------------------------------------------------------
# generated-message corpus for the round-trip property
# ---------------------------------------------------------------------------

_STRINGS = ["", "plain", "with space", "line\nbreak", "tab\tchar", "unicode: żółć 漢字", '"quoted"', "back\\slash"]


def _random_value(rng: Random, depth: int = 0):
    choices = ["str", "int", "float", "bool", "none"]
    if depth < 2:
        choices += ["list", "dict"]
    kind = rng.choice(choices)
    if kind == "str":
        return rng.choice(_STRINGS)
    if kind == "int":
        return rng.randint(-10_000, 10_000)
    if kind == "float":
        return round(rng.uniform(-1000, 1000), 6)
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "none":
        return None
    if kind == "list":
        return [_random_value(rng, depth + 1) for _ in range(rng.randint(0, 3))]
    return {f"k{i}": _random_value(rng, depth + 1) for i in range(rng.randint(0, 3))}


def random_message(rng: Random) -> RpcMessage:
    kind = rng.choice([MessageKind.REQUEST, MessageKind.RESPONSE, MessageKind.NOTIFICATION])
    extra = {}
    if rng.random() < 0.3:
        extra = {"_meta": _random_value(rng, 1)}
    params = _random_value(rng, 1) if rng.random() < 0.8 else None
    msg_id = rng.choice([rng.randint(1, 1_000_000), f"id-{rng.randint(0, 999)}"])
    if kind is MessageKind.REQUEST:
        return RpcMessage(kind, id=msg_id, method=f"method/{rng.randint(0, 99)}", params=params, extra=extra)
    if kind is MessageKind.NOTIFICATION:
        return RpcMessage(kind, method=f"notifications/{rng.randint(0, 99)}", params=params, extra=extra)
    if rng.random() < 0.3:
        return RpcMessage(
            kind, id=msg_id, error=RpcError(rng.randint(-32999, -32000), rng.choice(_STRINGS) or "err"), extra=extra
        )
    return RpcMessage(kind, id=msg_id, result=_random_value(rng, 0), extra=extra)


def test_round_trip_identity_over_generated_corpus():
    rng = Random(2024)
    for _ in range(1000):
        message = random_message(rng)
        assert decode_message(encode_message(message)) == message


def test_round_trip_preserves_unknown_members():
    line = b'{"jsonrpc":"2.0","id":7,"result":{},"_meta":{"trace":"abc"},"custom":[1,2]}'
    decoded = decode_message(line)
    assert decoded.extra == {"_meta": {"trace": "abc"}, "custom": [1, 2]}
    re_decoded = decode_message(encode_message(decoded))
    assert re_decoded == decoded


def test_encoding_is_single_newline_terminated_line():
    data = encode_message(request(1, "tools/list"))
    assert data.endswith(b"\n")
    assert data.count(b"\n") == 1
    obj = json.loads(data)
    assert obj["jsonrpc"] == "2.0"


def test_embedded_newlines_are_escaped_never_raw():
    msg = request(5, "tools/call", {"text": "line one\nline two"})
    data = encode_message(msg)
    assert data.count(b"\n") == 1  # only the terminator
    assert decode_message(data).params["text"] == "line one\nline two"


def test_notification_has_no_id_member():
    data = encode_message(notification("notifications/progress"))
    assert b'"id"' not in data


def test_decode_response_shape():
    decoded = decode_message(b'{"jsonrpc":"2.0","id":7,"result":{}}')
    assert decoded.kind is MessageKind.RESPONSE
    assert decoded.id == 7
    assert decoded.result == {}


def test_decode_rejects_idless_methodless_object():
    with pytest.raises(ProtocolError):
        decode_message(b'{"jsonrpc":"2.0"}')


def test_decode_rejects_truncated_json():
    with pytest.raises(ParseError):
        decode_message(b'{"jsonrpc":')


def test_decode_rejects_result_and_error_together():
    with pytest.raises(ProtocolError):
        decode_message(b'{"jsonrpc":"2.0","id":1,"result":1,"error":{"code":1,"message":"x"}}')


def test_decode_rejects_wrong_version():
    with pytest.raises(ProtocolError):
        decode_message(b'{"jsonrpc":"1.0","id":1,"method":"x"}')


def test_decode_rejects_null_request_id():
    with pytest.raises(ProtocolError):
        decode_message(b'{"jsonrpc":"2.0","id":null,"method":"x"}')


def test_encode_rejects_malformed_shapes():
    with pytest.raises(MalformedMessage):
        encode_message(RpcMessage(MessageKind.REQUEST, id=None, method="x"))
    with pytest.raises(MalformedMessage):
        encode_message(RpcMessage(MessageKind.NOTIFICATION, id=3, method="x"))
    with pytest.raises(MalformedMessage):
        encode_message(RpcMessage(MessageKind.RESPONSE, id=1, result=1, error=RpcError(1, "x")))
    with pytest.raises(MalformedMessage):
        encode_message(RpcMessage(MessageKind.REQUEST, id=1, method="x", extra={"id": 9}))


def test_reencoding_decoded_message_is_semantically_identical():
    original = b'{"jsonrpc":"2.0","method":"notifications/x","params":{"b":2,"a":1},"z_extra":true}'
    decoded = decode_message(original)
    assert json.loads(encode_message(decoded)) == json.loads(original)


def test_error_response_helper_round_trips():
    msg = error_response(9, -32601, "method not found", data={"method": "nope"})
    decoded = decode_message(encode_message(msg))
    assert decoded.error == RpcError(-32601, "method not found", {"method": "nope"})
    assert decoded == msg


def test_response_with_null_result_round_trips():
    msg = response(3, None)
    data = encode_message(msg)
    assert b'"result":null' in data
    assert decode_message(data) == msg
