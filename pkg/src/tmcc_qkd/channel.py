"""Public-channel exchange of the reconciliation XOR code.

Wire format: fixed frames `magic("TMCC") | version(1) | msg_type(1) |
length(4, big-endian) | payload`.  The XOR_CODE payload is a 4-byte
big-endian bit count followed by the bits packed MSB-first.  Only the XOR
code ever crosses the wire; the half-codes themselves stay local.
"""

from __future__ import annotations

import enum
import socket
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .protocol import KeyMaterial, Verdict, reconcile

MAGIC = b"TMCC"
VERSION = 1
HEADER = struct.Struct(">4sBBI")
MAX_PAYLOAD = 2**20
DEFAULT_TIMEOUT = 10.0


class MsgType(enum.IntEnum):
    HELLO = 1
    XOR_CODE = 2
    VERDICT = 3
    ABORT = 4


class Role(enum.Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"


class ExchangeVerdict(enum.Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    ABORT = "abort"


class FrameError(ValueError):
    """Malformed or oversized frame."""


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes = b""

    def __post_init__(self) -> None:
        if len(self.payload) > MAX_PAYLOAD:
            raise FrameError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")


@dataclass
class Transcript:
    """Raw frames seen on the wire, tagged by direction ('>' sent, '<' received)."""

    entries: list[tuple[str, bytes]] = field(default_factory=list)

    def record(self, direction: str, raw: bytes) -> None:
        self.entries.append((direction, raw))

    def dump_hex(self, path) -> None:
        with open(path, "w") as fh:
            for direction, raw in self.entries:
                fh.write(f"{direction} {raw.hex()}\n")


def encode_frame(frame: Frame) -> bytes:
    return HEADER.pack(MAGIC, VERSION, frame.msg_type, len(frame.payload)) + frame.payload


def decode_frame(raw: bytes) -> Frame:
    if len(raw) < HEADER.size:
        raise FrameError("short frame header")
    magic, version, msg_type, length = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FrameError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FrameError(f"unsupported version {version}")
    if length > MAX_PAYLOAD:
        raise FrameError("declared payload too large")
    if len(raw) != HEADER.size + length:
        raise FrameError("frame length does not match declared payload length")
    return Frame(msg_type, raw[HEADER.size :])


def pack_bits(bits: Sequence[int]) -> bytes:
    """XOR_CODE payload: 4-byte bit count then the bits packed MSB-first."""
    count = len(bits)
    out = bytearray(struct.pack(">I", count))
    byte = 0
    for i, b in enumerate(bits):
        byte = (byte << 1) | (int(b) & 1)
        if i % 8 == 7:
            out.append(byte)
            byte = 0
    if count % 8:
        out.append(byte << (8 - count % 8))
    return bytes(out)


def unpack_bits(payload: bytes) -> tuple[int, ...]:
    if len(payload) < 4:
        raise FrameError("xor-code payload shorter than its bit-count prefix")
    (count,) = struct.unpack_from(">I", payload)
    data = payload[4:]
    if len(data) != (count + 7) // 8:
        raise FrameError("xor-code payload length inconsistent with bit count")
    bits = []
    for i in range(count):
        bits.append((data[i // 8] >> (7 - i % 8)) & 1)
    return tuple(bits)


def _recv_exact(transport, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = transport.recv(n - len(buf))
        if not chunk:
            raise FrameError("transport closed mid-frame")
        buf += chunk
    return buf


def read_frame(transport, transcript: Optional[Transcript] = None) -> Frame:
    header = _recv_exact(transport, HEADER.size)
    magic, version, msg_type, length = HEADER.unpack(header)
    if magic != MAGIC or version != VERSION:
        raise FrameError("bad frame header")
    if length > MAX_PAYLOAD:
        raise FrameError("declared payload too large")
    payload = _recv_exact(transport, length) if length else b""
    if transcript is not None:
        transcript.record("<", header + payload)
    return Frame(msg_type, payload)


def send_frame(transport, frame: Frame, transcript: Optional[Transcript] = None) -> None:
    raw = encode_frame(frame)
    transport.sendall(raw)
    if transcript is not None:
        transcript.record(">", raw)


def _abort(transport, transcript: Optional[Transcript]) -> ExchangeVerdict:
    try:
        send_frame(transport, Frame(MsgType.ABORT), transcript)
    except OSError:
        pass
    return ExchangeVerdict.ABORT


def run_reconciliation_exchange(
    role: Role,
    key: KeyMaterial,
    transport,
    timeout: float = DEFAULT_TIMEOUT,
    transcript: Optional[Transcript] = None,
) -> ExchangeVerdict:
    """One blocking request/response reconciliation over a byte stream.

    The initiator sends HELLO then its XOR code; the responder reconciles
    and replies with the verdict.  Any timeout, malformed frame or closed
    stream yields ABORT (after a best-effort ABORT frame to the peer).
    """
    if hasattr(transport, "settimeout"):
        transport.settimeout(timeout)
    try:
        if role is Role.INITIATOR:
            send_frame(transport, Frame(MsgType.HELLO), transcript)
            send_frame(transport, Frame(MsgType.XOR_CODE, pack_bits(key.xor_code)), transcript)
            reply = read_frame(transport, transcript)
            if reply.msg_type != MsgType.VERDICT or not reply.payload:
                return _abort(transport, transcript)
            return ExchangeVerdict.MATCH if reply.payload[0] == 1 else ExchangeVerdict.MISMATCH

        hello = read_frame(transport, transcript)
        if hello.msg_type != MsgType.HELLO:
            return _abort(transport, transcript)
        code = read_frame(transport, transcript)
        if code.msg_type != MsgType.XOR_CODE:
            return _abort(transport, transcript)
        remote_bits = unpack_bits(code.payload)
        result = reconcile(key, remote_bits)
        payload = bytes([1 if result.verdict is Verdict.MATCH else 0])
        if result.verdict is Verdict.MISMATCH and "length" in result.detail:
            payload += b"\x01"  # detail byte: length mismatch
        send_frame(transport, Frame(MsgType.VERDICT, payload), transcript)
        return (
            ExchangeVerdict.MATCH if result.verdict is Verdict.MATCH else ExchangeVerdict.MISMATCH
        )
    except (FrameError, OSError):
        return _abort(transport, transcript)


def serve_reconciliation(
    host: str,
    port: int,
    key: KeyMaterial,
    timeout: float = DEFAULT_TIMEOUT,
    transcript: Optional[Transcript] = None,
    ready_callback=None,
) -> ExchangeVerdict:
    """Accept one TCP connection and run the responder side."""
    with socket.create_server((host, port)) as server:
        server.settimeout(timeout)
        if ready_callback is not None:
            ready_callback(server.getsockname()[1])
        try:
            conn, _ = server.accept()
        except (OSError, TimeoutError):
            return ExchangeVerdict.ABORT
        with conn:
            return run_reconciliation_exchange(Role.RESPONDER, key, conn, timeout, transcript)


def connect_reconciliation(
    host: str,
    port: int,
    key: KeyMaterial,
    timeout: float = DEFAULT_TIMEOUT,
    transcript: Optional[Transcript] = None,
) -> ExchangeVerdict:
    """Connect to a responder over TCP and run the initiator side."""
    try:
        with socket.create_connection((host, port), timeout=timeout) as conn:
            return run_reconciliation_exchange(Role.INITIATOR, key, conn, timeout, transcript)
    except OSError:
        return ExchangeVerdict.ABORT
