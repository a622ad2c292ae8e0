"""Framed wire protocol between verifier and prover.

Each frame is a 4-byte big-endian length followed by a UTF-8 JSON object
``{"type": ..., "session_id": ..., "payload": {...}}``. Bitstrings travel as
``{"n": <bits>, "bits": <hex, most significant bit first>}``.

Session flow, one TCP connection per session::

    prover   -> HELLO    {"prover": kind, "memory": {...}}
    verifier -> HELLO    {"n": n, "t": t}
    verifier -> X        bitstring
    prover   -> A        bitstring
    verifier -> Y        bitstring + {"challenge": hex}
    prover   -> B        bitstring + {"challenge": <echo>}
    verifier -> VERDICT  {"accept": bool, "win_count": int, "t": t}

Either side may send ERROR {"reason": ...} and close. The challenge echo in B
proves B was produced after Y arrived.
"""

from __future__ import annotations

import asyncio
import json
import socket
import struct
from typing import Any, Dict, Optional

from qiadv.game import Bitstring

MESSAGE_TYPES = ("HELLO", "X", "A", "Y", "B", "VERDICT", "ERROR")
BIT_TYPES = ("X", "A", "Y", "B")
MAX_FRAME = 16 * 1024 * 1024
_HEADER = struct.Struct(">I")

PHASE_VIOLATION = "phase violation"
LENGTH_MISMATCH = "length mismatch"


class ProtocolError(Exception):
    """A frame that is malformed or arrives out of order."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


def make_frame(kind: str, session_id: Optional[str], payload: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    if kind not in MESSAGE_TYPES:
        raise ValueError(f"unknown message type {kind!r}")
    return {"type": kind, "session_id": session_id, "payload": payload or {}}


def bits_payload(bits: Bitstring, **extra) -> Dict[str, Any]:
    return {"n": len(bits), "bits": bits.hex(), **extra}


def decode_bits(frame: Dict[str, Any], n: int) -> Bitstring:
    """Bitstring carried by an X/A/Y/B frame, checked against the game length ``n``."""
    payload = frame.get("payload") or {}
    if payload.get("n") != n:
        raise ProtocolError(LENGTH_MISMATCH, f"expected {n} bits, got {payload.get('n')!r}")
    text = payload.get("bits")
    if not isinstance(text, str):
        raise ProtocolError(LENGTH_MISMATCH, "missing bits")
    try:
        return Bitstring.from_hex(text, n)
    except ValueError as exc:
        raise ProtocolError(LENGTH_MISMATCH, str(exc)) from None


def encode(frame: Dict[str, Any]) -> bytes:
    body = json.dumps(frame, separators=(",", ":")).encode("utf-8")
    if len(body) > MAX_FRAME:
        raise ValueError("frame too large")
    return _HEADER.pack(len(body)) + body


def decode(body: bytes) -> Dict[str, Any]:
    try:
        frame = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError("malformed frame", str(exc)) from None
    if not isinstance(frame, dict) or frame.get("type") not in MESSAGE_TYPES:
        raise ProtocolError("malformed frame", f"bad type in {str(frame)[:80]}")
    return frame


async def read_frame(reader: asyncio.StreamReader) -> Dict[str, Any]:
    header = await reader.readexactly(_HEADER.size)
    (length,) = _HEADER.unpack(header)
    if length > MAX_FRAME:
        raise ProtocolError("malformed frame", f"length {length} exceeds limit")
    return decode(await reader.readexactly(length))


async def write_frame(writer: asyncio.StreamWriter, frame: Dict[str, Any]) -> None:
    writer.write(encode(frame))
    await writer.drain()


def _recv_exact(sock: socket.socket, size: int) -> bytes:
    chunks = []
    while size:
        chunk = sock.recv(size)
        if not chunk:
            raise ConnectionError("connection closed by peer")
        chunks.append(chunk)
        size -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> Dict[str, Any]:
    (length,) = _HEADER.unpack(_recv_exact(sock, _HEADER.size))
    if length > MAX_FRAME:
        raise ProtocolError("malformed frame", f"length {length} exceeds limit")
    return decode(_recv_exact(sock, length))


def send_frame(sock: socket.socket, frame: Dict[str, Any]) -> None:
    sock.sendall(encode(frame))


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like host:port, got {text!r}")
    return host or "127.0.0.1", int(port)
