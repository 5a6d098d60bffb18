"""Gradient blobs: loading, synthesis and corpus manifests.

A blob is a flat little-endian buffer of IEEE-754 binary32 values plus
provenance. Nothing here depends on any ML framework; users export raw
``.f32`` files and list them in a JSON manifest.

Synthesis uses NumPy's Philox4x32-10 counter-based bit generator, so a
(spec, seed) pair maps to one exact byte sequence on every platform.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FormatError

F32 = np.dtype("<f4")

MANIFEST_VERSION = 1

_DISTRIBUTIONS = ("gaussian", "laplace")


@dataclass(frozen=True)
class GradientBlob:
    """Raw gradient bytes plus provenance. ``data`` length is 4 * element_count."""

    data: bytes
    source: str = "unknown"

    def __post_init__(self):
        if len(self.data) % 4:
            raise FormatError(
                f"blob length {len(self.data)} not divisible by 4 (residue {len(self.data) % 4})"
            )

    @property
    def element_count(self) -> int:
        return len(self.data) // 4

    def floats(self) -> np.ndarray:
        """View the buffer as float32 values (bit-exact, NaN payloads intact)."""
        return np.frombuffer(self.data, dtype=F32)

    @classmethod
    def from_floats(cls, values, source="memory") -> "GradientBlob":
        arr = np.ascontiguousarray(values, dtype=F32)
        return cls(arr.tobytes(), source=source)

    def write(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.data)


def load_blob(path) -> GradientBlob:
    """Read a raw ``.f32`` file verbatim."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read blob {path!r}: {exc}") from exc
    if len(data) % 4:
        raise FormatError(
            f"{path!r}: size {len(data)} not divisible by 4 (residue {len(data) % 4})"
        )
    return GradientBlob(data, source=str(path))


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for synthetic gradient-like data.

    One scale per layer (a single scale broadcasts to all layers); values are
    drawn i.i.d. per layer and a ``sparsity_fraction`` of all entries is then
    zeroed at positions chosen by the same seeded stream. ``mantissa_bits``
    keeps only that many leading mantissa bits (10 mimics gradients that
    passed through half precision, as mixed-precision exports do); None
    leaves full binary32 precision.
    """

    layer_sizes: tuple[int, ...]
    scale_per_layer: tuple[float, ...] = (1.0,)
    distribution: str = "gaussian"
    sparsity_fraction: float = 0.0
    mantissa_bits: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        object.__setattr__(self, "scale_per_layer", tuple(float(s) for s in self.scale_per_layer))
        if not self.layer_sizes:
            raise ConfigError("layer_sizes must be nonempty")
        if any(n < 0 for n in self.layer_sizes):
            raise ConfigError("layer sizes must be nonnegative")
        if len(self.scale_per_layer) == 1 and len(self.layer_sizes) > 1:
            object.__setattr__(
                self, "scale_per_layer", self.scale_per_layer * len(self.layer_sizes)
            )
        if len(self.scale_per_layer) != len(self.layer_sizes):
            raise ConfigError(
                f"{len(self.scale_per_layer)} scales for {len(self.layer_sizes)} layers"
            )
        if any(s <= 0 for s in self.scale_per_layer):
            raise ConfigError("scales must be positive")
        if self.distribution not in _DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        if not 0.0 <= self.sparsity_fraction <= 1.0:
            raise ConfigError("sparsity_fraction must be in [0, 1]")
        if self.mantissa_bits is not None and not 0 <= self.mantissa_bits <= 23:
            raise ConfigError("mantissa_bits must be 0..23 or None")

    def to_json(self) -> dict:
        doc = {
            "layer_sizes": list(self.layer_sizes),
            "scale_per_layer": list(self.scale_per_layer),
            "distribution": self.distribution,
            "sparsity_fraction": self.sparsity_fraction,
        }
        if self.mantissa_bits is not None:
            doc["mantissa_bits"] = self.mantissa_bits
        return doc

    @classmethod
    def from_json(cls, obj) -> "GeneratorSpec":
        if not isinstance(obj, dict) or "layer_sizes" not in obj:
            raise ConfigError("generator spec must be an object with layer_sizes")
        return cls(
            layer_sizes=tuple(obj["layer_sizes"]),
            scale_per_layer=tuple(obj.get("scale_per_layer", (1.0,))),
            distribution=obj.get("distribution", "gaussian"),
            sparsity_fraction=float(obj.get("sparsity_fraction", 0.0)),
            mantissa_bits=obj.get("mantissa_bits"),
        )


def synth_gradients(spec: GeneratorSpec, seed: int) -> GradientBlob:
    """Deterministic synthetic gradients for (spec, seed)."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    parts = []
    for size, scale in zip(spec.layer_sizes, spec.scale_per_layer):
        if spec.distribution == "gaussian":
            layer = rng.normal(0.0, scale, size=size)
        else:
            layer = rng.laplace(0.0, scale, size=size)
        parts.append(layer.astype(F32))
    values = np.concatenate(parts) if parts else np.empty(0, dtype=F32)
    n = values.size
    k = int(round(spec.sparsity_fraction * n))
    if k:
        zero_at = rng.permutation(n)[:k]
        values[zero_at] = 0.0
    if spec.mantissa_bits is not None:
        keep = np.uint32((0xFFFFFFFF << (23 - spec.mantissa_bits)) & 0xFFFFFFFF)
        values = (values.view(np.uint32) & keep).view(F32)
    return GradientBlob(values.tobytes(), source=f"synth(seed={seed})")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    path: str | None = None
    generator: GeneratorSpec | None = None
    seed: int = 0
    element_count: int | None = None

    def load(self, base_dir=".") -> GradientBlob:
        if self.path is not None:
            blob = load_blob(os.path.join(base_dir, self.path))
        else:
            blob = synth_gradients(self.generator, self.seed)
        if self.element_count is not None and blob.element_count != self.element_count:
            raise FormatError(
                f"manifest entry {self.name!r}: expected {self.element_count} elements, "
                f"got {blob.element_count}"
            )
        return blob


@dataclass
class CorpusManifest:
    """Named corpus entries; either file-backed or generator-backed."""

    entries: list[ManifestEntry] = field(default_factory=list)
    base_dir: str = "."

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise FormatError("manifest entry names must be unique")

    def blobs(self):
        for entry in self.entries:
            yield entry.name, entry.load(self.base_dir)


def load_manifest(path) -> CorpusManifest:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MANIFEST_VERSION:
        raise FormatError(f"unsupported manifest format_version {doc.get('format_version')!r}")
    base_dir = os.path.dirname(os.path.abspath(path))
    entries = []
    for raw in doc.get("entries", []):
        name = raw.get("name")
        if not name:
            raise FormatError("manifest entry missing name")
        if ("path" in raw) == ("generator" in raw):
            raise FormatError(f"entry {name!r} needs exactly one of path/generator")
        gen = GeneratorSpec.from_json(raw["generator"]) if "generator" in raw else None
        entry = ManifestEntry(
            name=name,
            path=raw.get("path"),
            generator=gen,
            seed=int(raw.get("seed", 0)),
            element_count=raw.get("element_count"),
        )
        if entry.path is not None and not os.path.exists(os.path.join(base_dir, entry.path)):
            raise FormatError(f"entry {name!r}: file {entry.path!r} does not exist")
        entries.append(entry)
    return CorpusManifest(entries=entries, base_dir=base_dir)


def save_manifest(manifest: CorpusManifest, path) -> None:
    doc = {"format_version": MANIFEST_VERSION, "entries": []}
    for e in manifest.entries:
        raw = {"name": e.name}
        if e.path is not None:
            raw["path"] = e.path
        else:
            raw["generator"] = e.generator.to_json()
            raw["seed"] = e.seed
        if e.element_count is not None:
            raw["element_count"] = e.element_count
        doc["entries"].append(raw)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def subsample_entries(entries, count: int, seed: int) -> list:
    """Seed-controlled uniform sub-sample of corpus entries, order preserved."""
    if count >= len(entries):
        return list(entries)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    picked = sorted(rng.choice(len(entries), size=count, replace=False).tolist())
    return [entries[i] for i in picked]
