"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s``).

Directional checks run on a frozen synthetic corpus (see conftest): layered
scales, 5% exact zeros, half-precision-like mantissas. All tolerances are
stated inline; nothing is calibrated after the fact.
"""

import functools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import lmgc.coder as coder
from conftest import ACCEPTANCE_SEED
from lmgc import bench, lossy, pipeline
from lmgc.baselines import CodecAdapter, RleDictionary, baseline_compress, rle_encode
from lmgc.coder.exact import binary_expansion, encode_intervals
from lmgc.models import AdaptiveModel, StaticModel
from lmgc.serializer import parse_scheme, serialize, symbol_count
from lmgc.tensor_io import GeneratorSpec, synth_gradients

WINDOW_DEFAULT = 2048


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")

        return inner

    return wrap


def _rate(blob_bytes: bytes, scheme_str: str, order: int, window: int) -> float:
    scheme = parse_scheme(scheme_str)
    model = AdaptiveModel(order, scheme.vocab_size)
    compressed = pipeline.compress(blob_bytes, scheme, model, window)
    assert pipeline.decompress(compressed, model=AdaptiveModel(order, scheme.vocab_size)) == blob_bytes
    return bench.compression_rate(len(blob_bytes), len(compressed))


ALL_SCHEMES = ["iso", "hex:none"] + [
    f"hex:{sep}:{bpg}"
    for sep in ("space", "comma", "comma_space", "semicolon")
    for bpg in (1, 2, 3, 4, 8)
]


def _random_blob(kind: str, n_floats: int, rng) -> bytes:
    if kind == "zeros":
        return b"\x00" * (4 * n_floats)
    if kind == "random":
        return rng.bytes(4 * n_floats)
    if kind == "nan":
        bits = rng.integers(0, 1 << 32, n_floats, dtype=np.uint32)
        hit = rng.random(n_floats) < 0.3
        bits[hit] = bits[hit] | np.uint32(0x7F800000) | np.uint32(1)  # NaNs, payloads kept
        return bits.astype("<u4").tobytes()
    spec = GeneratorSpec((n_floats,), (10.0 ** rng.uniform(-4, -1),), "gaussian",
                         float(rng.uniform(0, 0.3)))
    return synth_gradients(spec, int(rng.integers(0, 2**31))).data


@criterion("losslessness over 200 randomized configurations")
def test_losslessness_suite():
    rng = np.random.default_rng(20240)
    start = time.perf_counter()
    for i in range(200):
        scheme_str = ALL_SCHEMES[rng.integers(0, len(ALL_SCHEMES))]
        scheme = parse_scheme(scheme_str)
        model_pick = rng.integers(0, 4)
        if model_pick == 3:
            model_fn = lambda: StaticModel.uniform(scheme.vocab_size)
        else:
            model_fn = lambda k=int(model_pick): AdaptiveModel(k, scheme.vocab_size)
        window = int(rng.choice([256, 2048]))
        kind = ["random", "nan", "zeros", "synth"][rng.integers(0, 4)]
        data = _random_blob(kind, int(rng.integers(128, 1024)), rng)
        compressed = pipeline.compress(data, scheme, model_fn(), window)
        assert pipeline.decompress(compressed, model=model_fn()) == data, (
            i, scheme_str, window, kind,
        )
    elapsed = time.perf_counter() - start
    assert elapsed < 300, f"suite took {elapsed:.0f}s, budget is 300s"


@criterion("worked interval example and midpoint code")
def test_worked_example():
    trace = encode_intervals([0, 0, 0, 1], (4, 1))
    bounds = [(iv.low, iv.high) for iv in trace]
    assert bounds == [
        (Fraction(0), Fraction("0.8")),
        (Fraction(0), Fraction("0.64")),
        (Fraction(0), Fraction("0.512")),
        (Fraction("0.4096"), Fraction("0.512")),
    ]
    assert trace[-1].midpoint == Fraction("0.4608")
    assert binary_expansion(trace[-1].midpoint, 8) == "0.01110101"


@criterion("near-optimal payload for a known Bernoulli(0.8) source")
def test_coder_near_optimality():
    rng = np.random.default_rng(99)
    n = 10**5
    tokens = (rng.random(n) >= 0.8).astype(np.uint8)
    model = StaticModel.from_probs([0.8, 0.2])
    payload, bitlens = coder.encode_tokens(tokens, model, n)
    back = coder.decode_tokens(payload, bitlens, n, model, n)
    assert np.array_equal(back, tokens)
    entropy = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))  # 0.7219 bits/symbol
    assert int(bitlens.sum()) <= 1.01 * n * entropy + 64


@criterion("symbol-count law matches serialization everywhere")
def test_symbol_count_law():
    assert symbol_count(parse_scheme("hex:space:4"), 8) == 17
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        scheme = parse_scheme(ALL_SCHEMES[rng.integers(0, len(ALL_SCHEMES))])
        n = int(rng.integers(0, 96))
        data = rng.bytes(n)
        assert len(serialize(data, scheme)) == symbol_count(scheme, n)


@criterion("compression-rate metric is exact and rows recompute")
def test_compression_rate_metric():
    assert bench.compression_rate(1000, 500) == 50.0
    config = bench.config_from_json({
        "corpus": {"synthetic": [
            {"name": "g", "spec": {"layer_sizes": [2000], "scale_per_layer": [1e-3]}, "seed": 1}
        ]},
        "schemes": ["hex:space:4", "iso"],
        "models": ["order1"],
        "window_sizes": [512],
        "baselines": ["deflate:unchunked"],
        "repeats": 2,
    })
    rows = bench.run_experiment(config)
    assert rows
    for row in rows:
        assert row.status == "ok"
        assert row.rate_percent == pytest.approx(
            100.0 * row.compressed_size / row.original_size, rel=1e-9
        )


@criterion("linear quantization formula and reconstruction bound")
def test_linear_quantization():
    assert lossy.quantize_linear([0, 1, 2, 3], 2).indices.tolist() == [0, 1, 2, 3]
    rng = np.random.default_rng(5)
    values = rng.normal(size=10**5).astype(np.float32)
    for n_bits in (1, 8, 16):
        q = lossy.quantize_linear(values, n_bits)
        err = np.abs(lossy.dequantize_linear(q) - values.astype(np.float64)).max()
        bound = (q.vmax - q.vmin) / (2 * ((1 << n_bits) - 1))
        assert err <= bound * (1 + 1e-9), (n_bits, err, bound)


@criterion("RLE dictionaries expand gradient data in the documented order")
def test_rle_expansion_ordering(acceptance_blob):
    data = acceptance_blob.data[: 1 << 20]
    assert len(data) >= 1 << 20
    rates = {
        kind: bench.compression_rate(len(data), len(rle_encode(data, RleDictionary(kind))))
        for kind in ("bits", "hex", "iso")
    }
    assert rates["bits"] > rates["hex"] > rates["iso"] > 100.0, rates


@criterion("larger context windows never hurt the order-2 coder")
def test_context_window_shape(acceptance_blob):
    rate_256 = _rate(acceptance_blob.data, "hex:space:4", 2, 256)
    rate_4096 = _rate(acceptance_blob.data, "hex:space:4", 2, 4096)
    assert rate_4096 <= rate_256, (rate_256, rate_4096)


@criterion("float-aligned byte groupings beat misaligned and absent grouping")
def test_byte_grouping_shape(acceptance_blob):
    assert len(acceptance_blob.data) >= 4 << 20
    rates = {
        s: _rate(acceptance_blob.data, s, 2, WINDOW_DEFAULT)
        for s in ("hex:space:1", "hex:space:2", "hex:space:3", "hex:space:4", "hex:none")
    }
    mean_aligned = (rates["hex:space:1"] + rates["hex:space:2"] + rates["hex:space:4"]) / 3
    assert mean_aligned <= rates["hex:space:3"], rates
    assert mean_aligned <= rates["hex:none"], rates


@criterion("512-byte chunking never beats whole-buffer DEFLATE")
def test_chunking_penalty(acceptance_blob):
    data = acceptance_blob.data[: 1 << 20]
    unchunked = baseline_compress(data, CodecAdapter("deflate"))
    chunked = baseline_compress(data, CodecAdapter("deflate", chunked=True))
    assert len(chunked) >= len(unchunked)


@criterion("lossy stages compose with lossless coding and unpack exactly")
def test_lossy_compatibility():
    spec = GeneratorSpec((30_000, 20_000, 14_000), (1e-3, 3e-3, 1e-4), "gaussian", 0.05, 11)
    blob = synth_gradients(spec, ACCEPTANCE_SEED)
    scheme = parse_scheme("hex:space:4")

    q = lossy.quantize_linear(blob.floats(), 8)
    packed_q = lossy.pack_for_compression(q)
    coded_q = pipeline.compress(packed_q, scheme, AdaptiveModel(2, scheme.vocab_size), WINDOW_DEFAULT)
    assert len(coded_q) < len(packed_q)
    back_q = lossy.unpack_quantized(pipeline.decompress(coded_q), blob.element_count)
    assert np.array_equal(back_q.indices, q.indices)
    assert (back_q.n_bits, back_q.vmin, back_q.vmax) == (q.n_bits, q.vmin, q.vmax)

    t = lossy.sparsify_topk(blob.floats(), 0.1)
    packed_s = lossy.pack_for_compression(t)
    coded_s = pipeline.compress(packed_s, scheme, AdaptiveModel(2, scheme.vocab_size), WINDOW_DEFAULT)
    assert len(coded_s) < len(packed_s)
    back_s = lossy.unpack_sparse(pipeline.decompress(coded_s))
    assert np.array_equal(back_s.kept_indices, t.kept_indices)
    assert back_s.kept_values.tobytes() == t.kept_values.tobytes()
    assert back_s.original_len == t.original_len
