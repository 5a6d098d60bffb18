"""Exact-rational interval arithmetic for arithmetic coding, kept separate
from the production range coder so textbook interval traces can be checked
without integer renormalization noise.

Weights may be ints, Fractions, or decimal strings ("0.8"); floats are
rejected because binary floats cannot represent most decimal probabilities
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _exact(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("pass ints, Fractions or decimal strings; floats are inexact")
    return Fraction(value)


def _cumulative(weights) -> list[Fraction]:
    if hasattr(weights, "freqs"):
        weights = [int(f) for f in weights.freqs]
    ws = [_exact(w) for w in weights]
    if any(w <= 0 for w in ws):
        raise ValueError("weights must be positive")
    cum = [Fraction(0)]
    for w in ws:
        cum.append(cum[-1] + w)
    return cum


@dataclass(frozen=True)
class Interval:
    """Half-open [low, high) with exact endpoints."""

    low: Fraction = Fraction(0)
    high: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("interval requires low < high")

    @property
    def width(self) -> Fraction:
        return self.high - self.low

    @property
    def midpoint(self) -> Fraction:
        return (self.low + self.high) / 2

    def contains(self, value) -> bool:
        v = _exact(value)
        return self.low <= v < self.high


def subdivide(interval: Interval, weights, symbol: int) -> Interval:
    """Select the symbol's sub-interval of ``interval`` under ``weights``.

    ``weights`` is any positive weight vector (a QuantizedPMF also works);
    boundaries are low + width * cum[s]/total.
    """
    cum = _cumulative(weights)
    if not 0 <= symbol < len(cum) - 1:
        raise ValueError(f"symbol {symbol} out of range")
    total = cum[-1]
    return Interval(
        interval.low + interval.width * cum[symbol] / total,
        interval.low + interval.width * cum[symbol + 1] / total,
    )


def encode_intervals(symbols, weights, start: Interval | None = None) -> list[Interval]:
    """Interval after each symbol, starting from [0, 1)."""
    interval = start or Interval()
    trace = []
    for s in symbols:
        interval = subdivide(interval, weights, s)
        trace.append(interval)
    return trace


def decode_value(value, weights, count: int) -> list[int]:
    """Recover ``count`` symbols by repeated interval lookup of ``value``."""
    v = _exact(value)
    interval = Interval()
    cum = _cumulative(weights)
    total = cum[-1]
    out = []
    for _ in range(count):
        offset = (v - interval.low) / interval.width * total
        symbol = next(i for i in range(len(cum) - 1) if cum[i] <= offset < cum[i + 1])
        out.append(symbol)
        interval = subdivide(interval, weights, symbol)
    return out


def binary_expansion(value, bits: int) -> str:
    """Truncated binary expansion "0.b1b2..." of a value in [0, 1)."""
    v = _exact(value)
    if not 0 <= v < 1:
        raise ValueError("value must be in [0, 1)")
    digits = []
    for _ in range(bits):
        v *= 2
        if v >= 1:
            digits.append("1")
            v -= 1
        else:
            digits.append("0")
    return "0." + "".join(digits)
