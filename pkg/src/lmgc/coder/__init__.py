"""Arithmetic coding: kernel dispatch plus the bitstream format.

``encode_tokens``/``decode_tokens`` route built-in models through the
compiled extension when it imported cleanly (set ``LMGC_NO_KERNEL=1`` to
force the pure-Python engine); bridge models and oversized context tables
always use the generic session loop. Both paths emit identical bits.
"""

from __future__ import annotations

import os

import numpy as np

from ..models.builtin import AdaptiveModel, StaticModel
from . import bitstream, engine
from .bitstream import Header, digest64

try:  # pragma: no cover - build-env dependent
    from . import _speed
except ImportError:  # pragma: no cover
    _speed = None


def kernel_active() -> bool:
    return _speed is not None and not os.environ.get("LMGC_NO_KERNEL")


def _kernel_route(model) -> str | None:
    if not kernel_active():
        return None
    if isinstance(model, StaticModel) and model.vocab_size <= 256:
        return "static"
    if isinstance(model, AdaptiveModel) and model.vocab_size <= 256 and model.dense_ok:
        return "adaptive"
    return None


def encode_tokens(tokens, model, window_size: int) -> tuple[bytes, np.ndarray]:
    """Encode a token stream into (window payload, per-window bit lengths)."""
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    route = _kernel_route(model)
    if route == "static":
        toks = np.ascontiguousarray(tokens, dtype=np.uint8)
        return _speed.encode_static(toks, model.pmf.cum(), model.precision_bits, window_size)
    if route == "adaptive":
        toks = np.ascontiguousarray(tokens, dtype=np.uint8)
        return _speed.encode_adaptive(
            toks, model.vocab_size, model.order, model.precision_bits, window_size
        )
    return engine.encode_tokens(tokens, model, window_size)


def decode_tokens(
    payload: bytes, bitlens: np.ndarray, n_tokens: int, model, window_size: int
) -> np.ndarray:
    """Decode ``n_tokens`` symbols; inverse of encode_tokens."""
    if bitlens.shape[0] != bitstream.expected_window_count(n_tokens, window_size):
        raise ValueError("window count does not match token count")
    route = _kernel_route(model)
    if route is not None:
        buf = np.frombuffer(payload, dtype=np.uint8)
        lens = np.ascontiguousarray(bitlens, dtype=np.uint32)
        if route == "static":
            out = _speed.decode_static(
                buf, lens, n_tokens, model.pmf.cum(), model.precision_bits, window_size
            )
        else:
            out = _speed.decode_adaptive(
                buf, lens, n_tokens, model.vocab_size, model.order, model.precision_bits,
                window_size,
            )
        return out.astype(np.uint32)
    return engine.decode_tokens(payload, bitlens, n_tokens, model, window_size)


__all__ = [
    "encode_tokens",
    "decode_tokens",
    "kernel_active",
    "bitstream",
    "engine",
    "Header",
    "digest64",
]
