"""Self-describing compressed-file layout.

Byte-exact layout (all integers little-endian):

    magic  "LMGC"              4 bytes
    version                    u16  (currently 1)
    scheme tag                 u8   (alphabet:2 | separator:3 | bpg:3)
    model id                   u8
    model fingerprint          u64
    window size                u32
    precision bits             u8
    token count                u64
    original byte length       u64
    digest                     u64  (BLAKE2b-64 of the original bytes)
    then per window:           u32 bit length, ceil(bits/8) payload bytes

Windows appear in order; a decoder can locate and decode any window
independently. The digest turns a silently wrong model into a loud error.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import FormatError

MAGIC = b"LMGC"
VERSION = 1

_HEADER = struct.Struct("<4sHBBQIBQQQ")
HEADER_SIZE = _HEADER.size  # 45 bytes


def digest64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class Header:
    scheme_tag: int
    model_id: int
    model_fingerprint: int
    window_size: int
    precision_bits: int
    token_count: int
    original_byte_len: int
    digest: int

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            VERSION,
            self.scheme_tag,
            self.model_id,
            self.model_fingerprint,
            self.window_size,
            self.precision_bits,
            self.token_count,
            self.original_byte_len,
            self.digest,
        )


def expected_window_count(token_count: int, window_size: int) -> int:
    return -(-token_count // window_size) if token_count else 0


def build(header: Header, payload: bytes, bitlens: np.ndarray) -> bytes:
    parts = [header.pack()]
    offset = 0
    for nbits in bitlens:
        nbits = int(nbits)
        nbytes = (nbits + 7) // 8
        parts.append(struct.pack("<I", nbits))
        parts.append(payload[offset : offset + nbytes])
        offset += nbytes
    if offset != len(payload):
        raise FormatError(f"payload has {len(payload)} bytes, windows consumed {offset}")
    return b"".join(parts)


def parse(data: bytes) -> tuple[Header, bytes, np.ndarray]:
    """Split a bitstream into header, concatenated window payload, bit lengths."""
    if len(data) < HEADER_SIZE:
        raise FormatError(f"bitstream shorter than the {HEADER_SIZE}-byte header")
    magic, version, scheme_tag, model_id, fingerprint, window, precision, tokens, orig, dig = (
        _HEADER.unpack_from(data)
    )
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    header = Header(scheme_tag, model_id, fingerprint, window, precision, tokens, orig, dig)
    if header.window_size < 1:
        raise FormatError("window_size must be >= 1")
    n_windows = expected_window_count(header.token_count, header.window_size)
    bitlens = np.empty(n_windows, dtype=np.uint32)
    chunks = []
    pos = HEADER_SIZE
    for widx in range(n_windows):
        if pos + 4 > len(data):
            raise FormatError(f"truncated bitstream: window {widx} length prefix missing")
        (nbits,) = struct.unpack_from("<I", data, pos)
        pos += 4
        nbytes = (nbits + 7) // 8
        if pos + nbytes > len(data):
            raise FormatError(f"truncated bitstream: window {widx} payload missing")
        bitlens[widx] = nbits
        chunks.append(data[pos : pos + nbytes])
        pos += nbytes
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes after the last window")
    return header, b"".join(chunks), bitlens
