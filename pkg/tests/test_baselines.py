import numpy as np
import pytest

from lmgc.baselines import (
    CHUNK_SIZE,
    CodecAdapter,
    RleDictionary,
    baseline_compress,
    baseline_decompress,
    rle_decode,
    rle_encode,
)
from lmgc.errors import ConfigError


class TestRle:
    def test_aaab_tuples(self):
        enc = rle_encode(b"AAAB", RleDictionary("iso"))
        # u32 tuple count, then (3, 'A'), (1, 'B')
        assert enc == b"\x02\x00\x00\x00" + bytes([3, ord("A"), 1, ord("B")])

    def test_run_cap_at_255(self):
        enc = rle_encode(b"\x42" * 300, RleDictionary("iso"))
        assert enc[4:] == bytes([255, 0x42, 45, 0x42])

    def test_zero_float_bits_single_tuple(self):
        enc = rle_encode(b"\x00\x00\x00\x00", RleDictionary("bits"))
        # one run of 32 zero bits -> one 9-bit tuple
        assert enc == b"\x01\x00\x00\x00" + bytes([32, 0])
        assert rle_decode(enc, RleDictionary("bits")) == b"\x00\x00\x00\x00"

    def test_empty_input(self):
        for kind in ("bits", "hex", "iso"):
            d = RleDictionary(kind)
            assert rle_decode(rle_encode(b"", d), d) == b""

    @pytest.mark.parametrize("kind", ["bits", "hex", "iso"])
    def test_roundtrip_random(self, kind, rng):
        d = RleDictionary(kind)
        for size in (1, 2, 3, 17, 256, 5000):
            data = rng.bytes(size)
            assert rle_decode(rle_encode(data, d), d) == data

    @pytest.mark.parametrize("kind", ["bits", "hex", "iso"])
    def test_roundtrip_runs(self, kind):
        d = RleDictionary(kind)
        data = b"\x00" * 1000 + b"\xff" * 1000 + b"\xa5\xa5\x5a" * 300
        assert rle_decode(rle_encode(data, d), d) == data

    def test_unknown_dictionary(self):
        with pytest.raises(ConfigError):
            RleDictionary("utf8")

    def test_expansion_ordering_on_gradient_data(self, acceptance_blob):
        data = acceptance_blob.data[: 1 << 20]
        rates = {}
        for kind in ("bits", "hex", "iso"):
            d = RleDictionary(kind)
            enc = rle_encode(data, d)
            assert rle_decode(enc, d) == data
            rates[kind] = 100 * len(enc) / len(data)
        assert rates["bits"] > rates["hex"] > rates["iso"] > 100.0


class TestCodecAdapters:
    def test_redundant_input_shrinks(self):
        out = baseline_compress(b"\x00" * 1024, CodecAdapter("deflate"))
        assert len(out) < 64
        assert baseline_decompress(out, CodecAdapter("deflate")) == b"\x00" * 1024

    def test_chunked_framing_exact(self):
        adapter = CodecAdapter("deflate", chunked=True)
        data = b"\x07" * 1024
        out = baseline_compress(data, adapter)
        # exactly two framed chunks
        import struct

        (len0,) = struct.unpack_from("<I", out, 0)
        (len1,) = struct.unpack_from("<I", out, 4 + len0)
        assert 4 + len0 + 4 + len1 == len(out)
        assert baseline_decompress(out, adapter) == data

    def test_chunked_roundtrip_unaligned(self, rng):
        adapter = CodecAdapter("deflate", chunked=True)
        data = rng.bytes(CHUNK_SIZE * 3 + 123)
        assert baseline_decompress(baseline_compress(data, adapter), adapter) == data

    def test_incompressible_floor(self, rng):
        data = rng.bytes(10**5)
        out = baseline_compress(data, CodecAdapter("deflate"))
        assert len(out) >= 0.99 * len(data)

    def test_chunking_never_helps_deflate(self, acceptance_blob):
        data = acceptance_blob.data[: 1 << 20]
        unchunked = baseline_compress(data, CodecAdapter("deflate"))
        chunked = baseline_compress(data, CodecAdapter("deflate", chunked=True))
        assert len(chunked) >= len(unchunked)

    @pytest.mark.parametrize("codec", ["deflate", "lzma", "bz2"])
    def test_optional_codecs_roundtrip(self, codec, rng):
        data = rng.bytes(4096) + b"\x00" * 4096
        for chunked in (False, True):
            adapter = CodecAdapter(codec, chunked=chunked)
            assert baseline_decompress(baseline_compress(data, adapter), adapter) == data

    def test_unavailable_codec_is_explicit(self):
        adapter = CodecAdapter("png")
        assert not adapter.available
        with pytest.raises(ConfigError):
            baseline_compress(b"xx", adapter)

    def test_unknown_codec_rejected(self):
        with pytest.raises(ConfigError):
            CodecAdapter("zstd-magic")
