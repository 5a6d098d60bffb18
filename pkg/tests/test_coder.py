import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lmgc.coder as coder
from lmgc import pipeline
from lmgc.coder import bitstream, engine
from lmgc.coder.exact import Interval, binary_expansion, decode_value, encode_intervals, subdivide
from lmgc.errors import FormatError, VerificationError
from lmgc.models import AdaptiveModel, StaticModel
from lmgc.serializer import parse_scheme
from lmgc.tensor_io import GradientBlob


class TestExactIntervals:
    def test_textbook_trace(self):
        # P(A)=0.8, P(B)=0.2 as exact weights (4, 1); message AAAB
        trace = encode_intervals([0, 0, 0, 1], (4, 1))
        lows = [iv.low for iv in trace]
        highs = [iv.high for iv in trace]
        assert lows == [0, 0, 0, Fraction(4096, 10000)]
        assert highs == [Fraction(8, 10), Fraction(64, 100), Fraction(512, 1000), Fraction(512, 1000)]

    def test_midpoint_binary_expansion(self):
        final = encode_intervals([0, 0, 0, 1], (4, 1))[-1]
        assert final.midpoint == Fraction(4608, 10000)
        assert binary_expansion(final.midpoint, 8) == "0.01110101"

    def test_expansion_value_lies_in_interval(self):
        final = encode_intervals([0, 0, 0, 1], (4, 1))[-1]
        value = Fraction(int("01110101", 2), 1 << 8)
        assert final.contains(value)

    def test_decode_by_interval_lookup(self):
        assert decode_value(Fraction(4608, 10000), (4, 1), 4) == [0, 0, 0, 1]

    def test_uniform_halving(self):
        iv = subdivide(Interval(), (1, 1), 0)
        assert (iv.low, iv.high) == (0, Fraction(1, 2))

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            subdivide(Interval(), (0.8, 0.2), 0)

    def test_decimal_strings_are_exact(self):
        iv = subdivide(Interval(), ("0.8", "0.2"), 0)
        assert iv.high == Fraction(4, 5)


def roundtrip(tokens, model, window):
    tokens = np.asarray(tokens, dtype=np.uint8)
    payload, bitlens = coder.encode_tokens(tokens, model, window)
    back = coder.decode_tokens(payload, bitlens, len(tokens), model, window)
    return payload, bitlens, back


class TestRangeCoder:
    def test_empty_stream(self):
        model = StaticModel.uniform(4, 16)
        payload, bitlens, back = roundtrip([], model, 256)
        assert payload == b"" and bitlens.size == 0 and back.size == 0

    def test_aaab_roundtrip_static(self):
        model = StaticModel.from_probs([0.8, 0.2])
        _, _, back = roundtrip([0, 0, 0, 1], model, 256)
        assert back.tolist() == [0, 0, 0, 1]

    def test_near_optimality_bernoulli(self):
        rng = np.random.default_rng(99)
        n = 10**5
        tokens = (rng.random(n) >= 0.8).astype(np.uint8)
        model = StaticModel.from_probs([0.8, 0.2])
        payload, bitlens, back = roundtrip(tokens, model, n)
        assert np.array_equal(back, tokens)
        entropy = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))
        assert int(bitlens.sum()) <= 1.01 * n * entropy + 64

    def test_payload_within_flush_slack_at_1e4(self):
        rng = np.random.default_rng(99)
        n = 10**4
        tokens = (rng.random(n) >= 0.8).astype(np.uint8)
        model = StaticModel.from_probs([0.8, 0.2])
        _, bitlens, back = roundtrip(tokens, model, n)
        assert np.array_equal(back, tokens)
        entropy = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))
        assert int(bitlens.sum()) <= n * entropy + 64

    def test_order0_adaptive_converges_to_source_entropy(self):
        probs = np.array([0.5, 0.25, 0.15, 0.10])
        entropy = float(-(probs * np.log2(probs)).sum())
        rng = np.random.default_rng(13)
        tokens = rng.choice(4, size=10**6, p=probs).astype(np.uint8)
        _, bitlens = coder.encode_tokens(tokens, AdaptiveModel(0, 4, 16), 10**6)
        assert abs(int(bitlens.sum()) / tokens.size - entropy) <= 0.1

    def test_window_independence_static(self, rng):
        # fixed-parameter models: windowed encode == concat of per-window encodes
        model = StaticModel.from_probs([0.5, 0.3, 0.2])
        tokens = rng.integers(0, 3, 1000, dtype=np.uint8)
        payload, bitlens = coder.encode_tokens(tokens, model, 256)
        parts = []
        for start in range(0, 1000, 256):
            p, b = coder.encode_tokens(tokens[start : start + 256], model, 256)
            parts.append((p, b))
        assert payload == b"".join(p for p, _ in parts)
        assert bitlens.tolist() == [int(b[0]) for _, b in parts]

    def test_kernel_and_engine_agree(self, rng, monkeypatch):
        if not coder.kernel_active():
            pytest.skip("compiled kernel not built")
        tokens = rng.integers(0, 17, 3000, dtype=np.uint8)
        for model_fn in (
            lambda: StaticModel.uniform(17, 16),
            lambda: AdaptiveModel(0, 17, 16),
            lambda: AdaptiveModel(2, 17, 16),
        ):
            fast = coder.encode_tokens(tokens, model_fn(), 512)
            slow = engine.encode_tokens(tokens, model_fn(), 512)
            assert fast[0] == slow[0]
            assert fast[1].tolist() == slow[1].tolist()
            back = engine.decode_tokens(fast[0], fast[1], tokens.size, model_fn(), 512)
            assert np.array_equal(back, tokens)

    @settings(max_examples=40, deadline=None)
    @given(
        tokens=st.lists(st.integers(0, 4), min_size=0, max_size=300),
        window=st.sampled_from([1, 7, 64, 256]),
        order=st.sampled_from([0, 1, 2]),
    )
    def test_roundtrip_property_adaptive(self, tokens, window, order):
        model = AdaptiveModel(order, 5, 16)
        _, _, back = roundtrip(tokens, model, window)
        assert back.tolist() == tokens

    def test_roundtrip_at_bridge_precision(self, rng):
        # precision 24 is the bridge default; exercise it on the built-ins too
        tokens = rng.integers(0, 17, 5000, dtype=np.uint8)
        for model_fn in (lambda: AdaptiveModel(1, 17, 24), lambda: StaticModel.uniform(17, 24)):
            _, _, back = roundtrip(tokens, model_fn(), 512)
            assert np.array_equal(back, tokens)


class TestBitstreamFormat:
    def test_header_size_and_fields(self):
        header = bitstream.Header(0x61, 0x12, 2**60, 2048, 16, 10, 40, 123)
        packed = header.pack()
        assert len(packed) == bitstream.HEADER_SIZE == 45
        assert packed[:4] == b"LMGC"

    def test_truncation_reports_window(self, rng):
        blob = GradientBlob(rng.bytes(4096))
        scheme = parse_scheme("hex:space:4")
        data = pipeline.compress(blob, scheme, AdaptiveModel(1, scheme.vocab_size), 512)
        with pytest.raises(FormatError, match="window"):
            bitstream.parse(data[:-10])

    def test_trailing_garbage_rejected(self, rng):
        blob = GradientBlob(rng.bytes(64))
        scheme = parse_scheme("hex:none")
        data = pipeline.compress(blob, scheme, AdaptiveModel(0, scheme.vocab_size), 512)
        with pytest.raises(FormatError, match="trailing"):
            bitstream.parse(data + b"x")

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="magic"):
            bitstream.parse(b"NOPE" + b"\0" * 60)


class TestPipeline:
    def test_tamper_detected(self, rng):
        blob = GradientBlob(rng.bytes(2048))
        scheme = parse_scheme("hex:space:4")
        model = AdaptiveModel(1, scheme.vocab_size)
        data = bytearray(pipeline.compress(blob, scheme, model, 512))
        data[bitstream.HEADER_SIZE + 7] ^= 0x40  # flip one payload bit
        with pytest.raises((VerificationError, FormatError)):
            pipeline.decompress(bytes(data))

    def test_fingerprint_mismatch_refused(self, rng):
        blob = GradientBlob(rng.bytes(256))
        scheme = parse_scheme("hex:space:4")
        data = pipeline.compress(blob, scheme, AdaptiveModel(1, scheme.vocab_size), 512)
        wrong = AdaptiveModel(2, scheme.vocab_size)
        with pytest.raises(VerificationError, match="fingerprint"):
            pipeline.decompress(data, model=wrong)

    def test_header_only_empty_blob(self):
        scheme = parse_scheme("hex:space:4")
        model = AdaptiveModel(1, scheme.vocab_size)
        data = pipeline.compress(GradientBlob(b""), scheme, model, 512)
        assert len(data) == bitstream.HEADER_SIZE
        assert pipeline.decompress(data) == b""

    def test_decompress_rebuilds_builtin_models(self, rng):
        blob = GradientBlob(rng.bytes(1024))
        for scheme_str, model_fn in [
            ("hex:space:4", lambda v: AdaptiveModel(2, v)),
            ("iso", lambda v: AdaptiveModel(0, v)),
            ("hex:none", lambda v: StaticModel.uniform(v)),
        ]:
            scheme = parse_scheme(scheme_str)
            data = pipeline.compress(blob, scheme, model_fn(scheme.vocab_size), 256)
            assert pipeline.decompress(data) == blob.data

    def test_window_shorter_padding_free(self, rng):
        # token count one past a window boundary
        blob = GradientBlob(rng.bytes(4 * 128))
        scheme = parse_scheme("iso")
        model = AdaptiveModel(1, scheme.vocab_size)
        data = pipeline.compress(blob, scheme, model, 511)
        assert pipeline.decompress(data) == blob.data
