#!/usr/bin/env python3
"""Compare the compiled coding kernel against the pure-Python engine.

Both paths must produce byte-identical bitstreams; this script checks that
on every case it times, then reports throughput side by side.

    python benchmarks/bench_kernels.py --floats 250000
"""

import argparse
import time

import numpy as np

import lmgc.coder as coder
from lmgc.coder import engine
from lmgc.models import AdaptiveModel, StaticModel
from lmgc.serializer import parse_scheme, serialize
from lmgc.tensor_io import GeneratorSpec, synth_gradients

CASES = [
    ("static uniform, hex:space:4", "hex:space:4", lambda v: StaticModel.uniform(v)),
    ("adaptive order-0, hex:space:4", "hex:space:4", lambda v: AdaptiveModel(0, v)),
    ("adaptive order-2, hex:space:4", "hex:space:4", lambda v: AdaptiveModel(2, v)),
    ("adaptive order-2, hex:none", "hex:none", lambda v: AdaptiveModel(2, v)),
    ("adaptive order-1, iso", "iso", lambda v: AdaptiveModel(1, v)),
]


def run(n_floats: int, window: int) -> None:
    spec = GeneratorSpec((n_floats,), (1e-3,), "gaussian", 0.05, 11)
    blob = synth_gradients(spec, 42)
    print(f"blob: {len(blob.data)} bytes, window {window}, "
          f"compiled kernel {'available' if coder.kernel_active() else 'MISSING'}")
    header = f"{'case':34s} {'tokens':>9s} {'compiled enc':>14s} {'python enc':>13s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, scheme_str, model_fn in CASES:
        scheme = parse_scheme(scheme_str)
        tokens = serialize(blob, scheme).symbols
        model = model_fn(scheme.vocab_size)

        t0 = time.perf_counter()
        fast = coder.encode_tokens(tokens, model, window)
        t_fast = time.perf_counter() - t0

        t0 = time.perf_counter()
        slow = engine.encode_tokens(tokens, model_fn(scheme.vocab_size), window)
        t_slow = time.perf_counter() - t0

        if fast[0] != slow[0] or fast[1].tolist() != slow[1].tolist():
            raise SystemExit(f"MISMATCH between engines on {name!r}")

        back = coder.decode_tokens(fast[0], fast[1], tokens.size, model_fn(scheme.vocab_size), window)
        if not np.array_equal(back, tokens):
            raise SystemExit(f"decode mismatch on {name!r}")

        rate_fast = tokens.size / t_fast / 1e6
        rate_slow = tokens.size / t_slow / 1e6
        print(f"{name:34s} {tokens.size:9d} {rate_fast:10.2f} Ms/s {rate_slow:9.3f} Ms/s "
              f"{t_slow / t_fast:7.1f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--floats", type=int, default=250_000)
    parser.add_argument("--window", type=int, default=2048)
    args = parser.parse_args()
    if not coder.kernel_active():
        print("note: compiled kernel inactive; timing the python engine against itself")
    run(args.floats, args.window)
