import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmgc.errors import ConfigError, FormatError
from lmgc.serializer import (
    Alphabet,
    Separator,
    SerializationScheme,
    deserialize,
    parse_scheme,
    serialize,
    stream_from_text,
    symbol_count,
)

ALL_SCHEMES = [
    "iso",
    "hex:none",
    "hex:space:1",
    "hex:space:2",
    "hex:space:3",
    "hex:space:4",
    "hex:space:8",
    "hex:comma:4",
    "hex:comma_space:4",
    "hex:semicolon:2",
]


def test_hex_single_float():
    stream = serialize(b"\x00\x00\x80\x3f", parse_scheme("hex:space:4"))
    assert stream.to_text() == "0000803f"


def test_comma_space_between_groups_only():
    stream = serialize(b"\x00\x00\x80\x3f" * 2, parse_scheme("hex:comma_space:4"))
    assert stream.to_text() == "0000803f, 0000803f"


def test_per_byte_grouping():
    stream = serialize(b"\x00\x00\x80\x3f", parse_scheme("hex:space:1"))
    assert stream.to_text() == "00 00 80 3f"


def test_iso_identity():
    data = bytes(range(256))
    stream = serialize(data, parse_scheme("iso"))
    assert stream.symbols.tolist() == list(range(256))
    assert deserialize(stream) == data


def test_deserialize_inverse_of_examples():
    scheme = parse_scheme("hex:space:4")
    assert deserialize(stream_from_text("0000803f", scheme)) == b"\x00\x00\x80\x3f"
    assert deserialize(serialize(b"", scheme)) == b""


def test_misplaced_separator_is_rejected():
    scheme = parse_scheme("hex:space:4")
    with pytest.raises(FormatError):
        stream_from_text("00 00", scheme)


def test_separator_inside_group_offset():
    scheme = parse_scheme("hex:space:4")
    with pytest.raises(FormatError) as err:
        deserialize(np.array([0, 0, 16, 0], dtype=np.uint8), scheme)
    assert err.value.offset == 2


def test_unknown_symbol_rejected():
    scheme = parse_scheme("hex:space:4")
    with pytest.raises(FormatError, match="outside vocabulary"):
        deserialize(np.array([0, 1, 2, 99], dtype=np.uint8), scheme)
    with pytest.raises(FormatError, match="not in scheme vocabulary"):
        stream_from_text("00zz", scheme)


def test_odd_nibble_count():
    with pytest.raises(FormatError, match="odd nibble"):
        deserialize(np.array([0, 1, 2], dtype=np.uint8), parse_scheme("hex:none"))


def test_symbol_count_examples():
    assert symbol_count(parse_scheme("hex:space:4"), 8) == 17
    assert symbol_count(parse_scheme("iso"), 8) == 8
    assert symbol_count(parse_scheme("hex:none"), 8) == 16
    assert symbol_count(parse_scheme("hex:comma_space:4"), 8) == 18
    for scheme in ALL_SCHEMES:
        assert symbol_count(parse_scheme(scheme), 0) == 0


def test_count_law_exhaustive_small():
    for scheme_str in ALL_SCHEMES:
        scheme = parse_scheme(scheme_str)
        for n in range(0, 40):
            data = b"\xa5" * n
            assert len(serialize(data, scheme)) == symbol_count(scheme, n), (scheme_str, n)


def test_trailing_short_group_roundtrips(rng):
    scheme = parse_scheme("hex:space:4")
    for n in (1, 2, 3, 5, 6, 7, 9, 10, 11):
        data = rng.bytes(n)
        stream = serialize(data, scheme)
        assert not stream.to_text().endswith(" ")
        assert deserialize(stream) == data


def test_vocabulary_closure(rng):
    for scheme_str in ALL_SCHEMES:
        scheme = parse_scheme(scheme_str)
        stream = serialize(rng.bytes(64), scheme)
        if stream.symbols.size:
            assert int(stream.symbols.max()) < scheme.vocab_size


def test_scheme_invariants():
    with pytest.raises(ConfigError):
        SerializationScheme(Alphabet.ISO_BYTE, Separator.SPACE, 4)
    with pytest.raises(ConfigError):
        SerializationScheme(Alphabet.HEX_NIBBLE, Separator.SPACE, None)
    with pytest.raises(ConfigError):
        SerializationScheme(Alphabet.HEX_NIBBLE, Separator.NONE, 4)
    with pytest.raises(ConfigError):
        SerializationScheme(Alphabet.HEX_NIBBLE, Separator.SPACE, 5)
    with pytest.raises(ConfigError):
        parse_scheme("hex:tab:4")


def test_scheme_tag_roundtrip():
    for scheme_str in ALL_SCHEMES:
        scheme = parse_scheme(scheme_str)
        assert SerializationScheme.from_tag(scheme.tag) == scheme
        assert parse_scheme(scheme.spec_string()) == scheme
    with pytest.raises(FormatError):
        SerializationScheme.from_tag(0xFF)


def test_text_roundtrip(rng):
    for scheme_str in ALL_SCHEMES:
        scheme = parse_scheme(scheme_str)
        data = rng.bytes(33)
        stream = serialize(data, scheme)
        again = stream_from_text(stream.to_text(), scheme)
        assert np.array_equal(again.symbols, stream.symbols)


@settings(max_examples=60, deadline=None)
@given(
    data=st.binary(min_size=0, max_size=200),
    scheme_str=st.sampled_from(ALL_SCHEMES),
)
def test_bijectivity_property(data, scheme_str):
    scheme = parse_scheme(scheme_str)
    stream = serialize(data, scheme)
    assert len(stream) == symbol_count(scheme, len(data))
    assert deserialize(stream) == data


@settings(max_examples=30, deadline=None)
@given(values=st.lists(st.floats(width=32, allow_nan=True, allow_infinity=True), max_size=40))
def test_bijectivity_float_patterns(values):
    data = np.array(values, dtype="<f4").tobytes()
    for scheme_str in ("hex:space:4", "iso", "hex:none"):
        scheme = parse_scheme(scheme_str)
        assert deserialize(serialize(data, scheme)) == data
