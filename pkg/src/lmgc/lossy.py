"""Lossy pre-transforms that compose with the lossless stage.

Linear quantization discretizes the value range uniformly into 2**n cells
(round-half-to-even; only cell indices travel), top-k sparsification keeps
the largest-magnitude entries as bit-exact floats with their positions, and
sign quantization is the 1-bit case of linear quantization. Packing turns
either representation into a byte buffer the lossless coder can consume;
all loss happens here, the coder stays exact.

Packed layouts (little-endian, version byte first):

  quantized:  u8 version=1, u8 n_bits, u16 reserved, f32 vmin, f32 vmax,
              then indices bit-packed LSB-first at n_bits each
              (12-byte header; element count supplied by the caller)
  sparse:     u8 version=1, u32 kept_count, u32 original_len,
              then kept positions as u32 each, then kept values as f32 each
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FormatError

PACK_VERSION = 1
QUANT_HEADER = struct.Struct("<BBHff")
SPARSE_HEADER = struct.Struct("<BII")


@dataclass(frozen=True)
class QuantizedTensor:
    indices: np.ndarray  # uint32 in [0, 2**n_bits - 1]
    n_bits: int
    vmin: float
    vmax: float

    def __post_init__(self):
        if not 1 <= self.n_bits <= 16:
            raise ConfigError(f"n_bits must be 1..16, got {self.n_bits}")
        if int(self.indices.max(initial=0)) >= 1 << self.n_bits:
            raise ConfigError("index outside the quantization grid")

    @property
    def element_count(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class SparseTensor:
    kept_indices: np.ndarray  # uint32, strictly increasing
    kept_values: np.ndarray  # float32, bit-exact originals
    original_len: int
    proportion: float

    @property
    def kept_count(self) -> int:
        return int(self.kept_indices.size)


def quantize_linear(values, n_bits: int) -> QuantizedTensor:
    """Uniform grid over [min, max]; index = round((v-min)/(max-min)*(2**n-1))."""
    v = np.asarray(values, dtype=np.float32)
    if v.size == 0:
        raise ValueError("cannot quantize an empty array")
    if not 1 <= n_bits <= 16:
        raise ConfigError(f"n_bits must be 1..16, got {n_bits}")
    if np.isnan(v).any():
        raise ValueError("NaN in input; quantization of NaN is undefined")
    vmin = float(v.min())
    vmax = float(v.max())
    if vmax == vmin:
        idx = np.zeros(v.size, dtype=np.uint32)
    else:
        t = (v.astype(np.float64) - vmin) / (vmax - vmin)
        idx = np.rint(t * ((1 << n_bits) - 1)).astype(np.uint32)
    return QuantizedTensor(idx, n_bits, vmin, vmax)


def dequantize_linear(q: QuantizedTensor) -> np.ndarray:
    """Cell-center reconstruction; max error <= (vmax-vmin)/(2*(2**n-1))."""
    span = q.vmax - q.vmin
    if span == 0.0:
        return np.full(q.element_count, q.vmin, dtype=np.float64)
    return q.vmin + q.indices.astype(np.float64) * (span / ((1 << q.n_bits) - 1))


def sign_quantize(values) -> QuantizedTensor:
    """1-bit quantization: two cells over [min, max]."""
    return quantize_linear(values, 1)


def sparsify_topk(values, proportion: float) -> SparseTensor:
    """Keep the ceil(proportion*len) largest-|v| entries, ties to lower index."""
    v = np.asarray(values, dtype=np.float32)
    if not 0 < proportion <= 1:
        raise ConfigError(f"proportion must be in (0, 1], got {proportion}")
    k = int(np.ceil(proportion * v.size))
    order = np.lexsort((np.arange(v.size), -np.abs(v)))[:k]
    keep = np.sort(order).astype(np.uint32)
    return SparseTensor(keep, v[keep], int(v.size), float(proportion))


def _pack_bits(indices: np.ndarray, n_bits: int) -> bytes:
    """LSB-first bit packing of n_bits-wide indices."""
    n = indices.size
    bits = (indices[:, None] >> np.arange(n_bits, dtype=np.uint32)[None, :]) & 1
    bits = bits.astype(np.uint8).reshape(-1)
    pad = (-bits.size) % 8
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return np.packbits(bits.reshape(-1, 8)[:, ::-1], axis=1, bitorder="big").tobytes()


def _unpack_bits(data: bytes, n_bits: int, count: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    need = count * n_bits
    if bits.size < need:
        raise FormatError(f"bit-packed payload too short for {count} indices")
    bits = bits[:need].reshape(count, n_bits).astype(np.uint32)
    return (bits << np.arange(n_bits, dtype=np.uint32)[None, :]).sum(axis=1, dtype=np.uint32)


def pack_quantized(q: QuantizedTensor) -> bytes:
    head = QUANT_HEADER.pack(PACK_VERSION, q.n_bits, 0, q.vmin, q.vmax)
    return head + _pack_bits(q.indices, q.n_bits)


def unpack_quantized(data: bytes, element_count: int) -> QuantizedTensor:
    if len(data) < QUANT_HEADER.size:
        raise FormatError("packed quantized tensor shorter than its header")
    version, n_bits, _, vmin, vmax = QUANT_HEADER.unpack_from(data)
    if version != PACK_VERSION:
        raise FormatError(f"unsupported pack version {version}")
    idx = _unpack_bits(data[QUANT_HEADER.size :], n_bits, element_count)
    return QuantizedTensor(idx, n_bits, vmin, vmax)


def pack_sparse(t: SparseTensor) -> bytes:
    head = SPARSE_HEADER.pack(PACK_VERSION, t.kept_count, t.original_len)
    return (
        head
        + t.kept_indices.astype("<u4").tobytes()
        + t.kept_values.astype("<f4").tobytes()
    )


def unpack_sparse(data: bytes) -> SparseTensor:
    if len(data) < SPARSE_HEADER.size:
        raise FormatError("packed sparse tensor shorter than its header")
    version, k, original_len = SPARSE_HEADER.unpack_from(data)
    if version != PACK_VERSION:
        raise FormatError(f"unsupported pack version {version}")
    body = data[SPARSE_HEADER.size :]
    if len(body) != 8 * k:
        raise FormatError(f"sparse payload is {len(body)} bytes, expected {8 * k}")
    idx = np.frombuffer(body[: 4 * k], dtype="<u4")
    val = np.frombuffer(body[4 * k :], dtype="<f4")
    return SparseTensor(idx.copy(), val.copy(), original_len, k / max(original_len, 1))


def pack_for_compression(t) -> bytes:
    """Byte buffer for the lossless stage; deterministic and invertible."""
    if isinstance(t, QuantizedTensor):
        return pack_quantized(t)
    if isinstance(t, SparseTensor):
        return pack_sparse(t)
    raise TypeError(f"cannot pack {type(t).__name__}")


def densify(t: SparseTensor) -> np.ndarray:
    """Reconstruct the dense vector with zeros at dropped positions."""
    out = np.zeros(t.original_len, dtype=np.float32)
    out[t.kept_indices] = t.kept_values
    return out
