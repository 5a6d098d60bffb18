"""Reversible byte-to-symbol serialization.

Two alphabets: ISO_BYTE maps each byte to its own symbol; HEX_NIBBLE emits
the high then low nibble of every byte as lowercase hex digits, optionally
inserting a separator after every ``bytes_per_group`` bytes (between groups
only, never trailing). Symbol ids are dense indices into the scheme's
vocabulary string: hex digits take ids 0..15, separator characters follow in
order, and ISO_BYTE ids equal the byte values.

The one-byte scheme tag stored in bitstream headers packs
``alphabet:2 | separator:3 | bpg:3`` from the most significant bits down;
bpg codes are 0=none, 1..4 literal, 5=eight bytes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FormatError


class Alphabet(enum.IntEnum):
    ISO_BYTE = 0
    HEX_NIBBLE = 1


class Separator(enum.IntEnum):
    NONE = 0
    SPACE = 1
    COMMA = 2
    COMMA_SPACE = 3
    SEMICOLON = 4


_SEPARATOR_TEXT = {
    Separator.NONE: "",
    Separator.SPACE: " ",
    Separator.COMMA: ",",
    Separator.COMMA_SPACE: ", ",
    Separator.SEMICOLON: ";",
}

_HEX_CHARS = "0123456789abcdef"

_BPG_CODES = {None: 0, 1: 1, 2: 2, 3: 3, 4: 4, 8: 5}
_BPG_FROM_CODE = {v: k for k, v in _BPG_CODES.items()}


@dataclass(frozen=True)
class SerializationScheme:
    alphabet: Alphabet
    separator: Separator = Separator.NONE
    bytes_per_group: int | None = None

    def __post_init__(self):
        if self.alphabet == Alphabet.ISO_BYTE:
            if self.separator != Separator.NONE or self.bytes_per_group is not None:
                raise ConfigError("ISO_BYTE takes no separator and no grouping")
        else:
            if self.bytes_per_group not in _BPG_CODES:
                raise ConfigError(f"bytes_per_group must be one of 1,2,3,4,8,None, got {self.bytes_per_group}")
            if self.separator != Separator.NONE and self.bytes_per_group is None:
                raise ConfigError("a separator requires bytes_per_group")
            if self.separator == Separator.NONE and self.bytes_per_group is not None:
                raise ConfigError("grouping without a separator is a no-op; use bytes_per_group=None")

    @property
    def separator_text(self) -> str:
        return _SEPARATOR_TEXT[self.separator]

    @property
    def vocab_chars(self) -> str:
        """Vocabulary as characters, index == symbol id (latin-1 for ISO_BYTE)."""
        if self.alphabet == Alphabet.ISO_BYTE:
            return bytes(range(256)).decode("latin-1")
        return _HEX_CHARS + self.separator_text

    @property
    def vocab_size(self) -> int:
        return 256 if self.alphabet == Alphabet.ISO_BYTE else 16 + len(self.separator_text)

    @property
    def tag(self) -> int:
        return (int(self.alphabet) << 6) | (int(self.separator) << 3) | _BPG_CODES[self.bytes_per_group]

    @classmethod
    def from_tag(cls, tag: int) -> "SerializationScheme":
        try:
            return cls(
                alphabet=Alphabet((tag >> 6) & 0x3),
                separator=Separator((tag >> 3) & 0x7),
                bytes_per_group=_BPG_FROM_CODE[tag & 0x7],
            )
        except (ValueError, KeyError, ConfigError) as exc:
            raise FormatError(f"invalid scheme tag 0x{tag:02x}: {exc}") from exc

    def spec_string(self) -> str:
        """Round-trippable name, e.g. ``hex:space:4`` or ``iso``."""
        if self.alphabet == Alphabet.ISO_BYTE:
            return "iso"
        if self.separator == Separator.NONE:
            return "hex:none"
        return f"hex:{self.separator.name.lower()}:{self.bytes_per_group}"


def parse_scheme(text: str) -> SerializationScheme:
    """Parse ``iso``, ``hex:none`` or ``hex:<separator>:<bpg>``."""
    parts = text.strip().lower().split(":")
    if parts == ["iso"]:
        return SerializationScheme(Alphabet.ISO_BYTE)
    if not parts or parts[0] != "hex":
        raise ConfigError(f"unknown scheme {text!r}")
    if len(parts) == 2 and parts[1] == "none":
        return SerializationScheme(Alphabet.HEX_NIBBLE)
    if len(parts) != 3:
        raise ConfigError(f"expected hex:<separator>:<bytes-per-group>, got {text!r}")
    try:
        sep = Separator[parts[1].upper()]
    except KeyError:
        raise ConfigError(f"unknown separator {parts[1]!r}") from None
    try:
        bpg = int(parts[2])
    except ValueError:
        raise ConfigError(f"bytes-per-group must be an integer, got {parts[2]!r}") from None
    return SerializationScheme(Alphabet.HEX_NIBBLE, sep, bpg)


DEFAULT_SCHEME = parse_scheme("hex:space:4")


@dataclass(frozen=True)
class SymbolStream:
    symbols: np.ndarray  # uint8 dense symbol ids
    scheme: SerializationScheme
    source_byte_len: int

    def __len__(self) -> int:
        return int(self.symbols.size)

    def to_text(self) -> str:
        table = np.frombuffer(self.scheme.vocab_chars.encode("latin-1"), dtype=np.uint8)
        return table[self.symbols].tobytes().decode("latin-1")


def symbol_count(scheme: SerializationScheme, byte_len: int) -> int:
    """Exact symbol count for serializing ``byte_len`` bytes."""
    if byte_len < 0:
        raise ValueError("byte_len must be nonnegative")
    if byte_len == 0:
        return 0
    if scheme.alphabet == Alphabet.ISO_BYTE:
        return byte_len
    n = 2 * byte_len
    sep_len = len(scheme.separator_text)
    if sep_len:
        groups = -(-byte_len // scheme.bytes_per_group)
        n += sep_len * (groups - 1)
    return n


def serialize(blob_or_bytes, scheme: SerializationScheme) -> SymbolStream:
    """Map raw bytes to dense symbol ids; bijective for every byte sequence."""
    data = blob_or_bytes if isinstance(blob_or_bytes, (bytes, bytearray, memoryview)) else blob_or_bytes.data
    raw = np.frombuffer(data, dtype=np.uint8)
    n = raw.size
    if scheme.alphabet == Alphabet.ISO_BYTE:
        return SymbolStream(raw.copy(), scheme, n)

    if n == 0:
        return SymbolStream(np.empty(0, dtype=np.uint8), scheme, 0)
    sep_len = len(scheme.separator_text)
    sep_ids = (16 + np.arange(sep_len)).astype(np.uint8)
    if sep_len == 0:
        out = np.empty(2 * n, dtype=np.uint8)
        out[0::2] = raw >> 4
        out[1::2] = raw & 0x0F
        return SymbolStream(out, scheme, n)

    bpg = scheme.bytes_per_group
    groups = -(-n // bpg)
    period = 2 * bpg + sep_len
    total = 2 * n + sep_len * (groups - 1)
    out = np.empty(total, dtype=np.uint8)
    byte_idx = np.arange(n)
    hi_pos = (byte_idx // bpg) * period + 2 * (byte_idx % bpg)
    out[hi_pos] = raw >> 4
    out[hi_pos + 1] = raw & 0x0F
    if groups > 1:
        sep_start = np.arange(groups - 1) * period + 2 * bpg
        for j in range(sep_len):
            out[sep_start + j] = sep_ids[j]
    return SymbolStream(out, scheme, n)


def _infer_byte_len(scheme: SerializationScheme, n_symbols: int) -> int:
    """Invert symbol_count; raises FormatError when no byte length fits."""
    if n_symbols == 0:
        return 0
    if scheme.alphabet == Alphabet.ISO_BYTE:
        return n_symbols
    sep_len = len(scheme.separator_text)
    if sep_len == 0:
        if n_symbols % 2:
            raise FormatError("odd nibble count", offset=n_symbols - 1)
        return n_symbols // 2
    bpg = scheme.bytes_per_group
    period = 2 * bpg + sep_len
    groups = -(-(n_symbols + sep_len) // period)
    rem = n_symbols - sep_len * (groups - 1)
    if rem <= 0 or rem % 2:
        raise FormatError("stream length inconsistent with grouping", offset=n_symbols - 1)
    byte_len = rem // 2
    if not (groups - 1) * bpg < byte_len <= groups * bpg:
        raise FormatError("stream length inconsistent with grouping", offset=n_symbols - 1)
    return byte_len


def deserialize(stream_or_symbols, scheme: SerializationScheme | None = None) -> bytes:
    """Invert serialize; validates grammar and reports the first bad offset."""
    if isinstance(stream_or_symbols, SymbolStream):
        symbols = stream_or_symbols.symbols
        scheme = stream_or_symbols.scheme
        declared = stream_or_symbols.source_byte_len
    else:
        symbols = np.asarray(stream_or_symbols, dtype=np.uint8)
        declared = None
    if scheme is None:
        raise ValueError("scheme required when passing bare symbols")

    n_sym = symbols.size
    if symbols.size and int(symbols.max()) >= scheme.vocab_size:
        bad = int(np.argmax(symbols >= scheme.vocab_size))
        raise FormatError(f"symbol id {int(symbols[bad])} outside vocabulary", offset=bad)

    if scheme.alphabet == Alphabet.ISO_BYTE:
        return symbols.tobytes()

    byte_len = _infer_byte_len(scheme, n_sym)
    if declared is not None and declared != byte_len:
        raise FormatError(f"stream implies {byte_len} bytes, header says {declared}")
    if byte_len == 0:
        return b""

    sep_len = scheme.vocab_size - 16
    if sep_len == 0:
        if np.any(symbols > 15):
            bad = int(np.argmax(symbols > 15))
            raise FormatError("separator symbol in separator-free scheme", offset=bad)
        return ((symbols[0::2].astype(np.uint8) << 4) | symbols[1::2]).tobytes()

    bpg = scheme.bytes_per_group
    period = 2 * bpg + sep_len
    groups = -(-byte_len // bpg)
    byte_idx = np.arange(byte_len)
    hi_pos = (byte_idx // bpg) * period + 2 * (byte_idx % bpg)
    nibble_mask = np.zeros(n_sym, dtype=bool)
    nibble_mask[hi_pos] = True
    nibble_mask[hi_pos + 1] = True
    # every non-nibble slot must hold the separator sequence, in order
    if groups > 1:
        sep_start = np.arange(groups - 1) * period + 2 * bpg
        for j in range(sep_len):
            slot = symbols[sep_start + j]
            if np.any(slot != 16 + j):
                bad = int(sep_start[np.argmax(slot != 16 + j)] + j)
                raise FormatError("separator expected", offset=bad)
    hexes = symbols[nibble_mask]
    if np.any(hexes > 15):
        bad_local = int(np.argmax(hexes > 15))
        bad = int(np.flatnonzero(nibble_mask)[bad_local])
        raise FormatError("separator symbol inside a group", offset=bad)
    hi = hexes[0::2].astype(np.uint8)
    lo = hexes[1::2]
    return ((hi << 4) | lo).tobytes()


def stream_from_text(text: str, scheme: SerializationScheme) -> SymbolStream:
    """Parse rendered text back into a symbol stream (inverse of to_text)."""
    raw = np.frombuffer(text.encode("latin-1"), dtype=np.uint8)
    if scheme.alphabet == Alphabet.ISO_BYTE:
        ids = raw
    else:
        table = np.full(256, 255, dtype=np.uint8)
        chars = np.frombuffer(scheme.vocab_chars.encode("latin-1"), dtype=np.uint8)
        table[chars] = np.arange(chars.size, dtype=np.uint8)
        ids = table[raw]
        if np.any(ids == 255):
            bad = int(np.argmax(ids == 255))
            raise FormatError(f"character {chr(raw[bad])!r} not in scheme vocabulary", offset=bad)
    byte_len = _infer_byte_len(scheme, ids.size)
    return SymbolStream(ids.copy(), scheme, byte_len)
