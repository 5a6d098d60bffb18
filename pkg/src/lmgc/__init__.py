"""Lossless gradient compression with autoregressive priors.

Pipeline: raw float32 gradients are serialized into text-like symbol
streams (hex nibbles with separators, or raw bytes), an autoregressive
model supplies integer next-symbol distributions, and an arithmetic coder
turns them into a compact, self-describing bitstream. Lossy pre-transforms
(linear quantization, top-k sparsification, sign quantization) compose with
the lossless stage; RLE and DEFLATE-class codecs serve as baselines.
"""

from .coder import decode_tokens, encode_tokens, kernel_active
from .errors import (
    BridgeUnavailableError,
    ConfigError,
    FormatError,
    LmgcError,
    VerificationError,
    WindowFullError,
)
from .models import AdaptiveModel, BridgeModel, QuantizedPMF, StaticModel, quantize_pmf
from .pipeline import compress, decompress
from .serializer import (
    DEFAULT_SCHEME,
    Alphabet,
    Separator,
    SerializationScheme,
    SymbolStream,
    deserialize,
    parse_scheme,
    serialize,
    symbol_count,
)
from .tensor_io import (
    CorpusManifest,
    GeneratorSpec,
    GradientBlob,
    load_blob,
    load_manifest,
    save_manifest,
    synth_gradients,
)

__version__ = "0.1.0"

__all__ = [
    "compress",
    "decompress",
    "encode_tokens",
    "decode_tokens",
    "kernel_active",
    "serialize",
    "deserialize",
    "symbol_count",
    "parse_scheme",
    "SerializationScheme",
    "SymbolStream",
    "Alphabet",
    "Separator",
    "DEFAULT_SCHEME",
    "StaticModel",
    "AdaptiveModel",
    "BridgeModel",
    "QuantizedPMF",
    "quantize_pmf",
    "GradientBlob",
    "GeneratorSpec",
    "CorpusManifest",
    "load_blob",
    "load_manifest",
    "save_manifest",
    "synth_gradients",
    "LmgcError",
    "ConfigError",
    "FormatError",
    "VerificationError",
    "WindowFullError",
    "BridgeUnavailableError",
]
