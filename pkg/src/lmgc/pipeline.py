"""End-to-end compression: blob -> symbols -> tokens -> bitstream and back.

Built-in models code the serializer's dense symbol ids directly; bridge
models receive the code points of the serialized text (the documented wire
tokenization), so the translation lives here, next to the header fields
that make decode self-describing.
"""

from __future__ import annotations

import numpy as np

from . import coder
from .coder.bitstream import Header, build, digest64, parse
from .errors import ConfigError, VerificationError
from .models import AdaptiveModel, BridgeModel, StaticModel
from .models.builtin import (
    MODEL_ID_ADAPTIVE_BASE,
    MODEL_ID_BRIDGE,
    MODEL_ID_STATIC_UNIFORM,
)
from .serializer import SerializationScheme, deserialize, serialize
from .tensor_io import GradientBlob

DEFAULT_WINDOW_SIZE = 2048


def _codepoint_table(scheme: SerializationScheme) -> np.ndarray:
    return np.frombuffer(scheme.vocab_chars.encode("latin-1"), dtype=np.uint8)


def _tokens_for_model(symbols: np.ndarray, scheme: SerializationScheme, model) -> np.ndarray:
    if getattr(model, "kind", None) == "bridge":
        table = _codepoint_table(scheme)
        if int(table.max(initial=0)) >= model.vocab_size:
            raise ConfigError(
                f"bridge vocab {model.vocab_size} cannot express scheme {scheme.spec_string()!r}"
            )
        return table[symbols].astype(np.uint32)
    if model.vocab_size < scheme.vocab_size:
        raise ConfigError(
            f"model vocab {model.vocab_size} smaller than scheme vocab {scheme.vocab_size}"
        )
    return symbols


def _symbols_from_tokens(tokens: np.ndarray, scheme: SerializationScheme, model) -> np.ndarray:
    if getattr(model, "kind", None) != "bridge":
        return tokens.astype(np.uint8)
    table = _codepoint_table(scheme)
    reverse = np.full(model.vocab_size, 255, dtype=np.uint8)
    reverse[table] = np.arange(table.size, dtype=np.uint8)
    symbols = reverse[tokens]
    if np.any(symbols == 255):
        raise VerificationError("decoded token outside the scheme vocabulary")
    return symbols


def compress(
    source: GradientBlob | bytes,
    scheme: SerializationScheme,
    model,
    window_size: int = DEFAULT_WINDOW_SIZE,
) -> bytes:
    """Losslessly compress bytes (or a blob) into a self-describing bitstream."""
    data = source.data if isinstance(source, GradientBlob) else bytes(source)
    max_context = getattr(model, "max_context", None)
    if max_context is not None:
        window_size = min(window_size, max_context)
    stream = serialize(data, scheme)
    tokens = _tokens_for_model(stream.symbols, scheme, model)
    payload, bitlens = coder.encode_tokens(tokens, model, window_size)
    header = Header(
        scheme_tag=scheme.tag,
        model_id=model.model_id,
        model_fingerprint=model.fingerprint,
        window_size=window_size,
        precision_bits=model.precision_bits,
        token_count=int(tokens.size),
        original_byte_len=len(data),
        digest=digest64(data),
    )
    return build(header, payload, bitlens)


def model_from_header(header: Header, scheme: SerializationScheme, bridge_endpoint=None):
    """Rebuild the coding model a header describes (built-ins and bridge)."""
    mid = header.model_id
    if mid == MODEL_ID_STATIC_UNIFORM:
        return StaticModel.uniform(scheme.vocab_size, header.precision_bits)
    if MODEL_ID_ADAPTIVE_BASE <= mid < MODEL_ID_ADAPTIVE_BASE + 4:
        return AdaptiveModel(mid - MODEL_ID_ADAPTIVE_BASE, scheme.vocab_size, header.precision_bits)
    if mid == MODEL_ID_BRIDGE:
        return BridgeModel(bridge_endpoint)
    raise ConfigError(f"model id 0x{mid:02x} cannot be rebuilt from the header; pass the model")


def decompress(data: bytes, model=None, bridge_endpoint=None) -> bytes:
    """Invert compress; verifies length and digest before returning the bytes."""
    header, payload, bitlens = parse(data)
    scheme = SerializationScheme.from_tag(header.scheme_tag)
    if model is None:
        model = model_from_header(header, scheme, bridge_endpoint)
    if model.fingerprint != header.model_fingerprint:
        raise VerificationError(
            f"model fingerprint {model.fingerprint:#018x} does not match the stream's "
            f"{header.model_fingerprint:#018x}; refusing to decode"
        )
    tokens = coder.decode_tokens(payload, bitlens, header.token_count, model, header.window_size)
    symbols = _symbols_from_tokens(tokens, scheme, model)
    raw = deserialize(symbols, scheme)
    if len(raw) != header.original_byte_len:
        raise VerificationError(
            f"decoded {len(raw)} bytes, header declares {header.original_byte_len}"
        )
    if digest64(raw) != header.digest:
        raise VerificationError("digest mismatch: decoded bytes differ from the original")
    return raw
