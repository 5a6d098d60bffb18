"""Built-in autoregressive models: static PMFs and adaptive order-k counting.

A model is a reusable description (vocab, precision, parameters); coding
state lives in sessions. One session covers one blob: adaptive counts
accumulate across the blob's windows, while ``reset`` clears only the
context, mirroring a fixed-weight language model whose attention window
restarts. Two sessions fed identical token sequences produce bit-identical
PMFs; that symmetry is what the coder relies on.

Context indexing (shared with the compiled kernel): a virtual BOS symbol
with value ``vocab`` pads short contexts, the context integer is
``sum(digit_i * (vocab+1)**i)`` with the most recent symbol as digit 0, and
advancing maps ``ctx -> (ctx*(vocab+1) + token) % (vocab+1)**order``.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import ConfigError, WindowFullError
from .pmf import QuantizedPMF, quantize_pmf, quantize_weights

MODEL_ID_STATIC_UNIFORM = 0x01
MODEL_ID_STATIC_CUSTOM = 0x02
MODEL_ID_ADAPTIVE_BASE = 0x10  # 0x10 + order, order in 0..3
MODEL_ID_BRIDGE = 0x20

MAX_ADAPTIVE_ORDER = 3
_DENSE_TABLE_LIMIT = 1 << 26  # entries; larger context spaces fall back to a dict


def _fingerprint(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


class _SessionBase:
    """Window bookkeeping common to all built-in sessions."""

    def __init__(self, window_size: int):
        if window_size < 1:
            raise ConfigError("window_size must be >= 1")
        self.window_size = window_size
        self.in_window = 0

    def _check_window(self):
        if self.in_window >= self.window_size:
            raise WindowFullError(
                f"context window of {self.window_size} tokens exhausted; reset() before predicting"
            )


class StaticModel:
    """Fixed PMF, identical at every position."""

    kind = "static"

    def __init__(self, pmf: QuantizedPMF, uniform: bool = False):
        self.pmf = pmf
        self.vocab_size = pmf.vocab_size
        self.precision_bits = pmf.precision_bits
        self.model_id = MODEL_ID_STATIC_UNIFORM if uniform else MODEL_ID_STATIC_CUSTOM
        tag = "uniform" if uniform else ",".join(str(int(f)) for f in pmf.freqs)
        self.fingerprint = _fingerprint(
            f"static:v1:vocab={self.vocab_size}:p={self.precision_bits}:{tag}"
        )

    @classmethod
    def uniform(cls, vocab_size: int, precision_bits: int = 16) -> "StaticModel":
        pmf = quantize_pmf(np.full(vocab_size, 1.0 / vocab_size), precision_bits)
        return cls(pmf, uniform=True)

    @classmethod
    def from_probs(cls, probs, precision_bits: int = 16) -> "StaticModel":
        return cls(quantize_pmf(probs, precision_bits))

    def open_session(self, window_size: int) -> "StaticSession":
        return StaticSession(self, window_size)


class StaticSession(_SessionBase):
    def __init__(self, model: StaticModel, window_size: int):
        super().__init__(window_size)
        self.model = model

    def pmf_next(self) -> QuantizedPMF:
        self._check_window()
        return self.model.pmf

    def advance(self, token: int) -> None:
        if not 0 <= token < self.model.vocab_size:
            raise ValueError(f"token {token} out of range for vocab {self.model.vocab_size}")
        self._check_window()
        self.in_window += 1

    def reset(self) -> None:
        self.in_window = 0


class AdaptiveModel:
    """Order-k symbol model with add-1 smoothing over the scheme vocabulary."""

    kind = "adaptive"

    def __init__(self, order: int, vocab_size: int, precision_bits: int = 16):
        if not 0 <= order <= MAX_ADAPTIVE_ORDER:
            raise ConfigError(f"adaptive order must be 0..{MAX_ADAPTIVE_ORDER}, got {order}")
        if vocab_size < 2:
            raise ConfigError("vocab_size must be >= 2")
        # validate precision against vocab up front
        quantize_pmf(np.full(vocab_size, 1.0 / vocab_size), precision_bits)
        self.order = order
        self.vocab_size = vocab_size
        self.precision_bits = precision_bits
        self.model_id = MODEL_ID_ADAPTIVE_BASE + order
        self.fingerprint = _fingerprint(
            f"adaptive:v1:k={order}:vocab={vocab_size}:p={precision_bits}"
        )
        self.context_space = (vocab_size + 1) ** order
        self.dense_ok = self.context_space * vocab_size <= _DENSE_TABLE_LIMIT

    def open_session(self, window_size: int) -> "AdaptiveSession":
        return AdaptiveSession(self, window_size)


class AdaptiveSession(_SessionBase):
    def __init__(self, model: AdaptiveModel, window_size: int):
        super().__init__(window_size)
        self.model = model
        if model.dense_ok:
            self._counts = np.zeros((model.context_space, model.vocab_size), dtype=np.int32)
        else:
            self._counts = {}
        self._bos_ctx = model.context_space - 1
        self._ctx = self._bos_ctx

    def _row(self) -> np.ndarray:
        if isinstance(self._counts, dict):
            row = self._counts.get(self._ctx)
            if row is None:
                row = np.zeros(self.model.vocab_size, dtype=np.int32)
                self._counts[self._ctx] = row
            return row
        return self._counts[self._ctx]

    def pmf_next(self) -> QuantizedPMF:
        self._check_window()
        freqs = quantize_weights(self._row() + 1, self.model.precision_bits)
        return QuantizedPMF(freqs, self.model.precision_bits)

    def advance(self, token: int) -> None:
        token = int(token)
        if not 0 <= token < self.model.vocab_size:
            raise ValueError(f"token {token} out of range for vocab {self.model.vocab_size}")
        self._check_window()
        self._row()[token] += 1
        if self.model.order:
            self._ctx = (self._ctx * (self.model.vocab_size + 1) + token) % self.model.context_space
        self.in_window += 1

    def reset(self) -> None:
        self._ctx = self._bos_ctx
        self.in_window = 0
