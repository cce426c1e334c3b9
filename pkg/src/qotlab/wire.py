"""Frame layout shared by every transport.

A frame is ``[u32 len][u8 type][payload]`` (big-endian, ``len`` counts the
payload only). The top bit of the type byte marks the last frame of a
protocol message, so a receiver can rebuild message boundaries and the
transcript can count messages rather than frames.
"""

from __future__ import annotations

import enum
import struct

from .errors import FrameTooLarge, HandshakeError, ProtocolError

MAGIC = b"QOTF"
VERSION = 1
MAX_FRAME = 16 * 1024 * 1024
END_OF_MESSAGE = 0x80

_HEADER = struct.Struct(">IB")
HEADER_SIZE = _HEADER.size
_HELLO = struct.Struct(">4sH")
HELLO_SIZE = _HELLO.size


class FrameType(enum.IntEnum):
    CONFIG = 1
    HASHKEY = 2
    DIGESTS = 3
    ZKPROOF = 4
    ZKMSG = 5
    QSTATE = 6
    SVEC = 7
    ZVEC = 8
    ABORT = 9


def encode_frame(ftype: FrameType, payload: bytes, last: bool) -> bytes:
    if len(payload) > MAX_FRAME:
        raise FrameTooLarge(f"payload of {len(payload)} bytes exceeds {MAX_FRAME}")
    tbyte = int(ftype) | (END_OF_MESSAGE if last else 0)
    return _HEADER.pack(len(payload), tbyte) + payload


def decode_header(header: bytes) -> tuple[int, FrameType, bool]:
    """Validate a frame header before any payload is allocated."""
    length, tbyte = _HEADER.unpack(header)
    if length > MAX_FRAME:
        raise FrameTooLarge(f"frame announces {length} bytes (cap {MAX_FRAME})")
    try:
        ftype = FrameType(tbyte & ~END_OF_MESSAGE)
    except ValueError as exc:
        raise ProtocolError(f"unknown frame type {tbyte:#x}") from exc
    return length, ftype, bool(tbyte & END_OF_MESSAGE)


def hello() -> bytes:
    return _HELLO.pack(MAGIC, VERSION)


def check_hello(data: bytes) -> None:
    magic, version = _HELLO.unpack(data)
    if magic != MAGIC:
        raise HandshakeError(f"bad magic {magic!r}")
    if version != VERSION:
        raise HandshakeError(f"peer speaks version {version}, we speak {VERSION}")


def encode_bitmask(members, n: int) -> bytes:
    """Subset of ``1..n`` as a little-endian bitmask (bit 0 of byte 0 is index 1)."""
    value = 0
    for i in members:
        if not 1 <= i <= n:
            raise ProtocolError(f"index {i} outside 1..{n}")
        value |= 1 << (i - 1)
    return value.to_bytes((n + 7) // 8, "little")


def decode_bitmask(data: bytes, n: int) -> frozenset[int]:
    if len(data) != (n + 7) // 8:
        raise ProtocolError("bitmask length mismatch")
    value = int.from_bytes(data, "little")
    if value >> n:
        raise ProtocolError("bitmask has bits beyond n")
    return frozenset(i + 1 for i in range(n) if (value >> i) & 1)
