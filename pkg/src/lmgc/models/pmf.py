"""Integer PMFs: the sole currency between models and the coder.

Every distribution handed to the coder is a vector of positive integer
frequencies summing to exactly 2**precision_bits, so encoder and decoder
agree bit-for-bit regardless of platform float behavior.

Two largest-remainder rules live here:

* ``quantize_pmf`` (real probabilities, also implemented server-side by
  bridge peers): floor allocation, one extra unit to the largest
  remainders (ties to the lower symbol id), then zeros raised to 1 off the
  largest entries (ties to the lower id).
* ``quantize_weights`` (integer counts, the adaptive-model hot path,
  duplicated verbatim in the compiled kernel): every symbol gets one
  reserved unit, the remaining ``total - vocab`` units are floor-allocated
  by weight, and leftovers go to the largest remainders (ties to the lower
  id). Reserving up front keeps every frequency positive without a fixup
  pass over the vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

MAX_PRECISION_BITS = 24


@dataclass(frozen=True)
class QuantizedPMF:
    freqs: np.ndarray  # int64, every entry >= 1
    precision_bits: int

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=np.int64))
        if self.freqs.ndim != 1 or self.freqs.size == 0:
            raise ConfigError("freqs must be a nonempty vector")
        if int(self.freqs.min(initial=1)) < 1:
            raise ConfigError("every frequency must be >= 1")
        if int(self.freqs.sum()) != self.total:
            raise ConfigError(f"frequencies sum to {int(self.freqs.sum())}, expected {self.total}")

    @property
    def total(self) -> int:
        return 1 << self.precision_bits

    @property
    def vocab_size(self) -> int:
        return int(self.freqs.size)

    def cum(self) -> np.ndarray:
        """Prefix sums, length vocab+1, cum[-1] == total."""
        out = np.zeros(self.vocab_size + 1, dtype=np.int64)
        np.cumsum(self.freqs, out=out[1:])
        return out


def _check_precision(vocab: int, precision_bits: int) -> None:
    if precision_bits > MAX_PRECISION_BITS:
        raise ConfigError(f"precision_bits {precision_bits} exceeds maximum {MAX_PRECISION_BITS}")
    if precision_bits < math.ceil(math.log2(vocab)) + 1:
        raise ConfigError(f"vocab {vocab} too large for precision_bits {precision_bits}")


def _distribute(base: np.ndarray, rem: np.ndarray, total: int) -> np.ndarray:
    leftover = total - int(base.sum())
    if leftover:
        order = np.lexsort((np.arange(rem.size), -rem))
        base[order[:leftover]] += 1
    # raise zeros to the minimum frequency, taking from the largest entries
    need = int(np.count_nonzero(base == 0))
    if need:
        base[base == 0] = 1
        for _ in range(need):
            base[int(np.argmax(base))] -= 1
    return base


def quantize_pmf(probs, precision_bits: int) -> QuantizedPMF:
    """Quantize real probabilities to integer frequencies summing to 2**precision_bits."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise ConfigError("probs must be a nonempty vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ConfigError("probabilities must be finite and nonnegative")
    s = float(probs.sum())
    if s <= 0:
        raise ConfigError("probabilities sum to zero")
    _check_precision(probs.size, precision_bits)
    total = 1 << precision_bits
    scaled = probs * (total / s)
    base = np.floor(scaled).astype(np.int64)
    rem = scaled - base
    return QuantizedPMF(_distribute(base, rem, total), precision_bits)


def quantize_weights(weights: np.ndarray, precision_bits: int) -> np.ndarray:
    """Exact integer-arithmetic form used for adaptive counts (weights >= 1).

    Returns the frequency vector only; the rule must stay bit-identical to
    the compiled kernel's copy.
    """
    w = np.asarray(weights, dtype=np.int64)
    total = 1 << precision_bits
    wsum = int(w.sum())
    num = w * (total - w.size)
    base = 1 + num // wsum
    rem = num % wsum
    leftover = total - int(base.sum())
    if leftover:
        order = np.lexsort((np.arange(w.size), -rem))
        base[order[:leftover]] += 1
    return base
