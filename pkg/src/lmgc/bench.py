"""Experiment runner: rate metric, entropy estimates, and sweep grids.

A grid is the cross product of corpus entries, serialization schemes,
models, window sizes and lossy stages, plus one row per baseline codec per
entry. Every coder row is verified by a full decode-and-compare (and
unpack-compare for lossy stages) before its rate is reported; rows whose
component is unavailable are emitted with a ``skipped:<reason>`` status and
the run continues.

Rows are deterministic given the config seed: repeat ``i`` re-derives
synthetic corpora and the sub-sample with ``seed + i``. Wall time covers
serialization and coding, never disk I/O. Reports are one CSV row per
repeat (so each rate recomputes exactly from its sizes) with mean/std
aggregates of the repeat group attached, plus a JSON sidecar carrying the
full config and an environment fingerprint.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, coder, lossy, pipeline
from .baselines import CodecAdapter, RleDictionary, baseline_compress, baseline_decompress, rle_decode, rle_encode
from .errors import BridgeUnavailableError, ConfigError, VerificationError
from .models import AdaptiveModel, BridgeModel, StaticModel
from .serializer import SerializationScheme, parse_scheme
from .tensor_io import GeneratorSpec, GradientBlob, load_manifest, subsample_entries, synth_gradients


def compression_rate(original_size: int, compressed_size: int) -> float:
    """Percent of the original size; >100 means expansion."""
    if original_size <= 0:
        raise ValueError("original_size must be positive")
    return 100.0 * compressed_size / original_size


def entropy_estimate(data: bytes, order: int = 0, symbol_bits: int = 8) -> float:
    """Plug-in conditional entropy (bits per symbol) at the given context order."""
    if order not in (0, 1, 2):
        raise ConfigError("order must be 0, 1 or 2")
    if symbol_bits not in (1, 4, 8):
        raise ConfigError("symbol_bits must be 1, 4 or 8")
    raw = np.frombuffer(data, dtype=np.uint8)
    if symbol_bits == 8:
        sym = raw
    elif symbol_bits == 4:
        sym = np.empty(raw.size * 2, dtype=np.uint8)
        sym[0::2] = raw >> 4
        sym[1::2] = raw & 0x0F
    else:
        sym = np.unpackbits(raw, bitorder="big")
    vocab = 1 << symbol_bits
    if sym.size <= order:
        return 0.0
    if order == 0:
        counts = np.bincount(sym, minlength=vocab).astype(np.float64)
        p = counts[counts > 0] / sym.size
        return float(-(p * np.log2(p)).sum())
    keys = sym[: sym.size - order].astype(np.int64)
    for j in range(1, order + 1):
        keys = keys * vocab + sym[j : sym.size - order + j]
    joint = np.bincount(keys, minlength=vocab ** (order + 1)).astype(np.float64)
    ctx = joint.reshape(-1, vocab).sum(axis=1)
    n = sym.size - order
    mask = joint > 0
    ctx_of = np.repeat(ctx, vocab)[mask]
    j = joint[mask]
    return float((j / n * np.log2(ctx_of / j)).sum())


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class CorpusItem:
    name: str
    blob: GradientBlob | None = None  # file-backed entries are pre-loaded
    generator: GeneratorSpec | None = None
    seed: int = 0

    def realize(self, repeat_offset: int) -> GradientBlob:
        if self.blob is not None:
            return self.blob
        return synth_gradients(self.generator, self.seed + repeat_offset)


@dataclass
class ExperimentConfig:
    corpus: list[CorpusItem]
    schemes: list[SerializationScheme]
    models: list[str]
    window_sizes: list[int]
    lossy: list[str] = field(default_factory=lambda: ["none"])
    baselines: list[str] = field(default_factory=list)
    repeats: int = 1
    seed: int = 0
    subsample: int | None = None
    bridge_endpoint: str | None = None

    def __post_init__(self):
        if not self.corpus:
            raise ConfigError("corpus is empty")
        if not (self.schemes and self.models and self.window_sizes and self.lossy):
            raise ConfigError("schemes, models, window_sizes and lossy must be nonempty")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        for spec in self.lossy:
            _parse_lossy(spec)
        for spec in self.baselines:
            _parse_baseline(spec)

    def to_json(self) -> dict:
        return {
            "corpus": [
                {"name": c.name, "seed": c.seed}
                | ({"generator": c.generator.to_json()} if c.generator else {"preloaded": True})
                for c in self.corpus
            ],
            "schemes": [s.spec_string() for s in self.schemes],
            "models": self.models,
            "window_sizes": self.window_sizes,
            "lossy": self.lossy,
            "baselines": self.baselines,
            "repeats": self.repeats,
            "seed": self.seed,
            "subsample": self.subsample,
            "bridge_endpoint": self.bridge_endpoint,
        }


def config_from_json(doc: dict, base_dir: str = ".") -> ExperimentConfig:
    corpus: list[CorpusItem] = []
    spec = doc.get("corpus", {})
    if "manifest" in spec:
        manifest = load_manifest(spec["manifest"])
        for entry in manifest.entries:
            if entry.generator is not None:
                corpus.append(CorpusItem(entry.name, generator=entry.generator, seed=entry.seed))
            else:
                corpus.append(CorpusItem(entry.name, blob=entry.load(manifest.base_dir)))
    for item in spec.get("synthetic", []):
        corpus.append(
            CorpusItem(
                item["name"],
                generator=GeneratorSpec.from_json(item["spec"]),
                seed=int(item.get("seed", 0)),
            )
        )
    return ExperimentConfig(
        corpus=corpus,
        schemes=[parse_scheme(s) for s in doc.get("schemes", ["hex:space:4"])],
        models=list(doc.get("models", ["order2"])),
        window_sizes=[int(w) for w in doc.get("window_sizes", [2048])],
        lossy=list(doc.get("lossy", ["none"])),
        baselines=list(doc.get("baselines", [])),
        repeats=int(doc.get("repeats", 1)),
        seed=int(doc.get("seed", 0)),
        subsample=doc.get("subsample"),
        bridge_endpoint=doc.get("bridge_endpoint"),
    )


@dataclass
class ReportRow:
    entry: str
    codec: str
    scheme: str
    model: str
    window: int | None
    lossy: str
    repeat: int
    status: str = "ok"
    original_size: int | None = None
    payload_size: int | None = None
    compressed_size: int | None = None
    rate_percent: float | None = None
    wall_time_s: float | None = None
    rate_mean: float | None = None
    rate_std: float | None = None

    def key(self) -> tuple:
        return (self.entry, self.codec, self.scheme, self.model, self.window, self.lossy)


# ------------------------------------------------------------ model cache


def make_model(name: str, scheme: SerializationScheme, bridge_endpoint=None, precision: int = 16):
    if name in ("uniform", "static"):
        return StaticModel.uniform(scheme.vocab_size, precision)
    if name.startswith("order") and name[5:].isdigit():
        return AdaptiveModel(int(name[5:]), scheme.vocab_size, precision)
    if name == "bridge":
        return BridgeModel(bridge_endpoint)
    raise ConfigError(f"unknown model {name!r} (use uniform, order0..order3 or bridge)")


def _parse_lossy(spec: str):
    if spec == "none":
        return None
    if spec == "sign":
        return ("quant", 1)
    kind, _, arg = spec.partition(":")
    if kind == "quant":
        return ("quant", int(arg))
    if kind == "sparsify":
        return ("sparsify", float(arg))
    raise ConfigError(f"unknown lossy stage {spec!r} (none, quant:N, sparsify:P, sign)")


def _parse_baseline(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "rle":
        return RleDictionary(arg)
    return CodecAdapter(kind, chunked=(arg == "chunked"))


def _apply_lossy(blob: GradientBlob, spec: str) -> tuple[bytes, object]:
    stage = _parse_lossy(spec)
    if stage is None:
        return blob.data, None
    kind, arg = stage
    if kind == "quant":
        t = lossy.quantize_linear(blob.floats(), arg)
    else:
        t = lossy.sparsify_topk(blob.floats(), arg)
    return lossy.pack_for_compression(t), t


def _verify_lossy(packed: bytes, t, element_count: int) -> None:
    if t is None:
        return
    if isinstance(t, lossy.QuantizedTensor):
        back = lossy.unpack_quantized(packed, element_count)
        same = (
            np.array_equal(back.indices, t.indices)
            and back.n_bits == t.n_bits
            and back.vmin == t.vmin
            and back.vmax == t.vmax
        )
    else:
        back = lossy.unpack_sparse(packed)
        same = (
            np.array_equal(back.kept_indices, t.kept_indices)
            and back.kept_values.tobytes() == t.kept_values.tobytes()
            and back.original_len == t.original_len
        )
    if not same:
        raise VerificationError("lossy representation did not survive the round trip")


# ------------------------------------------------------------ experiment


def run_experiment(config: ExperimentConfig) -> list[ReportRow]:
    rows: list[ReportRow] = []
    bridge_cache: dict[str, object] = {}

    def get_model(name: str, scheme: SerializationScheme):
        if name == "bridge":
            key = config.bridge_endpoint or "<env>"
            if key not in bridge_cache:
                bridge_cache[key] = BridgeModel(config.bridge_endpoint)
            return bridge_cache[key]
        return make_model(name, scheme, config.bridge_endpoint)

    for repeat in range(config.repeats):
        entries = config.corpus
        if config.subsample is not None:
            entries = subsample_entries(entries, config.subsample, config.seed + repeat)
        for item in entries:
            blob = item.realize(config.seed + repeat if item.blob is None else 0)
            for lossy_spec in config.lossy:
                data, lossy_repr = _apply_lossy(blob, lossy_spec)
                for scheme in config.schemes:
                    for model_name in config.models:
                        for window in config.window_sizes:
                            row = ReportRow(
                                entry=item.name,
                                codec="coder",
                                scheme=scheme.spec_string(),
                                model=model_name,
                                window=window,
                                lossy=lossy_spec,
                                repeat=repeat,
                                original_size=len(blob.data),
                                payload_size=len(data),
                            )
                            try:
                                model = get_model(model_name, scheme)
                                t0 = time.perf_counter()
                                compressed = pipeline.compress(data, scheme, model, window)
                                back = pipeline.decompress(compressed, model=model)
                                row.wall_time_s = time.perf_counter() - t0
                                if back != data:
                                    raise VerificationError("round trip mismatch")
                                _verify_lossy(back, lossy_repr, blob.element_count)
                                row.compressed_size = len(compressed)
                                row.rate_percent = compression_rate(len(blob.data), len(compressed))
                            except BridgeUnavailableError:
                                row.status = "skipped:bridge-unavailable"
                            rows.append(row)
                for baseline_spec in config.baselines:
                    row = ReportRow(
                        entry=item.name,
                        codec=baseline_spec,
                        scheme="",
                        model="",
                        window=None,
                        lossy=lossy_spec,
                        repeat=repeat,
                        original_size=len(blob.data),
                        payload_size=len(data),
                    )
                    try:
                        tool = _parse_baseline(baseline_spec)
                        if isinstance(tool, RleDictionary):
                            t0 = time.perf_counter()
                            compressed = rle_encode(data, tool)
                            back = rle_decode(compressed, tool)
                            row.wall_time_s = time.perf_counter() - t0
                        else:
                            if not tool.available:
                                row.status = "skipped:codec-unavailable"
                                rows.append(row)
                                continue
                            t0 = time.perf_counter()
                            compressed = baseline_compress(data, tool)
                            back = baseline_decompress(compressed, tool)
                            row.wall_time_s = time.perf_counter() - t0
                        if back != data:
                            raise VerificationError("baseline round trip mismatch")
                        row.compressed_size = len(compressed)
                        row.rate_percent = compression_rate(len(blob.data), len(compressed))
                    except ConfigError:
                        row.status = "skipped:codec-unavailable"
                    rows.append(row)
    _attach_aggregates(rows)
    return rows


def _attach_aggregates(rows: list[ReportRow]) -> None:
    groups: dict[tuple, list[ReportRow]] = {}
    for row in rows:
        groups.setdefault(row.key(), []).append(row)
    for group in groups.values():
        rates = [r.rate_percent for r in group if r.rate_percent is not None]
        if not rates:
            continue
        mean = float(np.mean(rates))
        std = float(np.std(rates))
        for r in group:
            r.rate_mean = mean
            r.rate_std = std


CSV_FIELDS = [
    "entry", "codec", "scheme", "model", "window", "lossy", "repeat", "status",
    "original_size", "payload_size", "compressed_size", "rate_percent",
    "wall_time_s", "rate_mean", "rate_std",
]


def write_csv(rows: list[ReportRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: getattr(row, k) for k in CSV_FIELDS})


def environment_fingerprint() -> dict:
    return {
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "compiled_kernel": coder.kernel_active(),
    }


def write_json(config: ExperimentConfig, rows: list[ReportRow], path) -> None:
    doc = {
        "config": config.to_json(),
        "environment": environment_fingerprint(),
        "rows": [{k: getattr(r, k) for k in CSV_FIELDS} for r in rows],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
