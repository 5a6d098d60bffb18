"""Pure-Python range coder and the generic session-driven coding loops.

The coder keeps a 62-bit interval in 64-bit integers, renormalizes bit by
bit (MSB-first within bytes) and defers middle-straddle bits with the
classic pending-bit counter, so carries never propagate into the buffer.
Each window is flushed with a single 1 bit; decoders zero-pad past the
recorded bit length, which supplies the deferred complements.

The compiled kernel reimplements exactly this arithmetic; the two must
produce identical bitstreams for identical inputs (tests enforce it).
"""

from __future__ import annotations

import numpy as np

from ..errors import FormatError

STATE_BITS = 62
FULL = 1 << STATE_BITS
HALF = FULL >> 1
QUARTER = FULL >> 2
MASK = FULL - 1


class _BitWriter:
    __slots__ = ("buf", "cur", "fill", "total_bits")

    def __init__(self):
        self.buf = bytearray()
        self.cur = 0
        self.fill = 0
        self.total_bits = 0

    def write(self, bit: int) -> None:
        self.cur = (self.cur << 1) | bit
        self.fill += 1
        self.total_bits += 1
        if self.fill == 8:
            self.buf.append(self.cur)
            self.cur = 0
            self.fill = 0

    def finish(self) -> tuple[bytes, int]:
        if self.fill:
            self.buf.append(self.cur << (8 - self.fill))
            self.cur = 0
            self.fill = 0
        return bytes(self.buf), self.total_bits


class _BitReader:
    __slots__ = ("data", "nbits", "pos")

    def __init__(self, data: bytes, nbits: int):
        self.data = data
        self.nbits = nbits
        self.pos = 0

    def read(self) -> int:
        if self.pos >= self.nbits:
            self.pos += 1
            return 0
        bit = (self.data[self.pos >> 3] >> (7 - (self.pos & 7))) & 1
        self.pos += 1
        return bit


class RangeEncoder:
    def __init__(self, writer: _BitWriter):
        self.low = 0
        self.high = MASK
        self.pending = 0
        self.writer = writer

    def _emit(self, bit: int) -> None:
        self.writer.write(bit)
        if self.pending:
            inv = bit ^ 1
            for _ in range(self.pending):
                self.writer.write(inv)
            self.pending = 0

    def encode(self, cum_lo: int, cum_hi: int, total: int) -> None:
        span = self.high - self.low + 1
        self.high = self.low + (cum_hi * span) // total - 1
        self.low = self.low + (cum_lo * span) // total
        while ((self.low ^ self.high) & HALF) == 0:
            self._emit(self.low >> (STATE_BITS - 1))
            self.low = (self.low << 1) & MASK
            self.high = ((self.high << 1) & MASK) | 1
        while self.low & ~self.high & QUARTER:
            self.pending += 1
            self.low = (self.low << 1) & (MASK >> 1)
            self.high = ((self.high << 1) & (MASK >> 1)) | HALF | 1

    def finish(self) -> None:
        # one disambiguating bit; zero-padding on the read side completes it
        self._emit(1)


class RangeDecoder:
    def __init__(self, reader: _BitReader):
        self.low = 0
        self.high = MASK
        self.reader = reader
        code = 0
        for _ in range(STATE_BITS):
            code = (code << 1) | reader.read()
        self.code = code

    def decode(self, cum: np.ndarray, total: int) -> int:
        span = self.high - self.low + 1
        value = ((self.code - self.low + 1) * total - 1) // span
        symbol = int(np.searchsorted(cum, value, side="right")) - 1
        cum_lo = int(cum[symbol])
        cum_hi = int(cum[symbol + 1])
        self.high = self.low + (cum_hi * span) // total - 1
        self.low = self.low + (cum_lo * span) // total
        while ((self.low ^ self.high) & HALF) == 0:
            self.code = ((self.code << 1) & MASK) | self.reader.read()
            self.low = (self.low << 1) & MASK
            self.high = ((self.high << 1) & MASK) | 1
        while self.low & ~self.high & QUARTER:
            self.code = (self.code & HALF) | ((self.code << 1) & (MASK >> 1)) | self.reader.read()
            self.low = (self.low << 1) & (MASK >> 1)
            self.high = ((self.high << 1) & (MASK >> 1)) | HALF | 1
        return symbol


def encode_tokens(tokens, model, window_size: int) -> tuple[bytes, np.ndarray]:
    """Session-driven encode; returns (payload, per-window bit lengths)."""
    tokens = np.asarray(tokens)
    session = model.open_session(window_size)
    payload = bytearray()
    bitlens = []
    use_batch = hasattr(session, "score_window")
    for start in range(0, len(tokens), window_size):
        window = tokens[start : start + window_size]
        session.reset()
        writer = _BitWriter()
        enc = RangeEncoder(writer)
        if use_batch:
            total = 1 << model.precision_bits
            for tok, freqs in zip(window, session.score_window(window)):
                tok = int(tok)
                cum = np.zeros(freqs.size + 1, dtype=np.int64)
                np.cumsum(freqs, out=cum[1:])
                enc.encode(int(cum[tok]), int(cum[tok + 1]), total)
        else:
            for tok in window:
                tok = int(tok)
                pmf = session.pmf_next()
                cum = pmf.cum()
                enc.encode(int(cum[tok]), int(cum[tok + 1]), pmf.total)
                session.advance(tok)
        enc.finish()
        chunk, nbits = writer.finish()
        payload += chunk
        bitlens.append(nbits)
    return bytes(payload), np.asarray(bitlens, dtype=np.uint32)


def decode_tokens(
    payload: bytes, bitlens: np.ndarray, n_tokens: int, model, window_size: int
) -> np.ndarray:
    """Inverse of encode_tokens for the same model parameters."""
    session = model.open_session(window_size)
    out = np.empty(n_tokens, dtype=np.uint32)
    pos = 0
    offset = 0
    for widx, nbits in enumerate(bitlens):
        nbits = int(nbits)
        nbytes = (nbits + 7) // 8
        if offset + nbytes > len(payload):
            raise FormatError(f"payload truncated in window {widx}")
        count = min(window_size, n_tokens - pos)
        if count <= 0:
            raise FormatError(f"window {widx} has no tokens to decode")
        session.reset()
        dec = RangeDecoder(_BitReader(payload[offset : offset + nbytes], nbits))
        for _ in range(count):
            pmf = session.pmf_next()
            sym = dec.decode(pmf.cum(), pmf.total)
            out[pos] = sym
            pos += 1
            session.advance(sym)
        offset += nbytes
    if pos != n_tokens:
        raise FormatError(f"decoded {pos} tokens, header declares {n_tokens}")
    return out
