"""Reference codecs: run-length encoding and general-purpose compressors.

RLE views the input as a stream of 1-, 4- or 8-bit symbols (bit and nibble
order match the hex serializer: most significant first within each byte),
emits maximal runs capped at 255 as (count u8, symbol) tuples, bit-packs
them contiguously MSB-first, and prefixes the tuple count as u32-LE. The
tuple overhead is why RLE expands gradient-like data; the three
dictionaries reproduce that expansion ordering.

Codec adapters wrap stdlib compressors. Chunked mode compresses each
512-byte chunk independently and frames it with a u32-LE compressed length;
unchunked mode is the plain whole-buffer codec.
"""

from __future__ import annotations

import bz2
import lzma
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FormatError

CHUNK_SIZE = 512
COUNT_BITS = 8
RUN_CAP = 255

_RLE_KINDS = {"bits": 1, "hex": 4, "iso": 8}


@dataclass(frozen=True)
class RleDictionary:
    kind: str  # bits | hex | iso

    def __post_init__(self):
        if self.kind not in _RLE_KINDS:
            raise ConfigError(f"RLE dictionary must be one of {sorted(_RLE_KINDS)}")

    @property
    def symbol_bits(self) -> int:
        return _RLE_KINDS[self.kind]


def _to_symbols(data: bytes, width: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    if width == 8:
        return raw
    if width == 4:
        out = np.empty(raw.size * 2, dtype=np.uint8)
        out[0::2] = raw >> 4
        out[1::2] = raw & 0x0F
        return out
    return np.unpackbits(raw, bitorder="big")


def _from_symbols(symbols: np.ndarray, width: int) -> bytes:
    if width == 8:
        return symbols.astype(np.uint8).tobytes()
    if width == 4:
        if symbols.size % 2:
            raise FormatError("odd nibble count after RLE decode")
        return ((symbols[0::2] << 4) | symbols[1::2]).astype(np.uint8).tobytes()
    if symbols.size % 8:
        raise FormatError("bit count not a multiple of 8 after RLE decode")
    return np.packbits(symbols.astype(np.uint8), bitorder="big").tobytes()


def _run_lengths(symbols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximal runs split at the 255 cap."""
    if symbols.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.uint8)
    boundaries = np.flatnonzero(symbols[1:] != symbols[:-1]) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [symbols.size]))
    lengths = ends - starts
    full, rest = np.divmod(lengths, RUN_CAP)
    counts = []
    values = []
    for s, f, r in zip(starts, full, rest):
        if f:
            counts.append(np.full(f, RUN_CAP, dtype=np.int64))
            values.append(np.full(f, symbols[s], dtype=np.uint8))
        if r:
            counts.append(np.array([r], dtype=np.int64))
            values.append(np.array([symbols[s]], dtype=np.uint8))
    return np.concatenate(counts), np.concatenate(values)


def rle_encode(data: bytes, dictionary: RleDictionary) -> bytes:
    width = dictionary.symbol_bits
    counts, values = _run_lengths(_to_symbols(data, width))
    n = counts.size
    head = struct.pack("<I", n)
    if n == 0:
        return head
    tuple_bits = np.empty((n, COUNT_BITS + width), dtype=np.uint8)
    tuple_bits[:, :COUNT_BITS] = (
        (counts[:, None] >> np.arange(COUNT_BITS - 1, -1, -1)[None, :]) & 1
    )
    tuple_bits[:, COUNT_BITS:] = (
        (values[:, None].astype(np.int64) >> np.arange(width - 1, -1, -1)[None, :]) & 1
    )
    return head + np.packbits(tuple_bits.reshape(-1), bitorder="big").tobytes()


def rle_decode(data: bytes, dictionary: RleDictionary) -> bytes:
    width = dictionary.symbol_bits
    if len(data) < 4:
        raise FormatError("RLE buffer shorter than its tuple-count prefix")
    (n,) = struct.unpack_from("<I", data)
    body = np.frombuffer(data[4:], dtype=np.uint8)
    need_bits = n * (COUNT_BITS + width)
    bits = np.unpackbits(body, bitorder="big")
    if bits.size < need_bits:
        raise FormatError(f"RLE buffer too short for {n} tuples")
    bits = bits[:need_bits].reshape(n, COUNT_BITS + width)
    counts = bits[:, :COUNT_BITS].dot(1 << np.arange(COUNT_BITS - 1, -1, -1))
    values = bits[:, COUNT_BITS:].dot(1 << np.arange(width - 1, -1, -1)).astype(np.uint8)
    if np.any(counts == 0):
        raise FormatError("zero-length run in RLE buffer")
    return _from_symbols(np.repeat(values, counts), width)


# ---------------------------------------------------------------- adapters

_CODECS = {
    "deflate": (lambda d: zlib.compress(d, 9), zlib.decompress),
    "lzma": (lambda d: lzma.compress(d, preset=6), lzma.decompress),
    "bz2": (lambda d: bz2.compress(d, 9), bz2.decompress),
}


@dataclass(frozen=True)
class CodecAdapter:
    codec: str
    chunked: bool = False

    def __post_init__(self):
        if self.codec not in _CODECS and self.codec not in ("png", "flac", "fpzip"):
            raise ConfigError(f"unknown codec {self.codec!r}")

    @property
    def available(self) -> bool:
        return self.codec in _CODECS

    @property
    def mode(self) -> str:
        return f"chunked({CHUNK_SIZE})" if self.chunked else "unchunked"

    def name(self) -> str:
        return f"{self.codec}:{'chunked' if self.chunked else 'unchunked'}"


def baseline_compress(data: bytes, adapter: CodecAdapter) -> bytes:
    if not adapter.available:
        raise ConfigError(f"codec {adapter.codec!r} is not available in this build")
    compress_fn = _CODECS[adapter.codec][0]
    if not adapter.chunked:
        return compress_fn(data)
    parts = []
    for start in range(0, len(data), CHUNK_SIZE):
        comp = compress_fn(data[start : start + CHUNK_SIZE])
        parts.append(struct.pack("<I", len(comp)))
        parts.append(comp)
    return b"".join(parts)


def baseline_decompress(data: bytes, adapter: CodecAdapter) -> bytes:
    if not adapter.available:
        raise ConfigError(f"codec {adapter.codec!r} is not available in this build")
    decompress_fn = _CODECS[adapter.codec][1]
    if not adapter.chunked:
        return decompress_fn(data)
    out = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise FormatError("truncated chunk length prefix", offset=pos)
        (clen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + clen > len(data):
            raise FormatError("truncated chunk payload", offset=pos)
        out.append(decompress_fn(data[pos : pos + clen]))
        pos += clen
    return b"".join(out)
