# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled coding loops: the range coder fused with the built-in models.

Bit-identical to the pure-Python engine (same 62-bit state, same pending-bit
carry handling, same integer PMF quantization); parity is enforced by tests.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdlib cimport free, malloc, qsort, realloc

import numpy as np

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

ctypedef unsigned long long u64
ctypedef long long i64
ctypedef unsigned int u32
ctypedef unsigned char u8

cdef int STATE_BITS = 62
cdef u64 FULL = (<u64>1) << 62
cdef u64 HALF = FULL >> 1
cdef u64 QUARTER = FULL >> 2
cdef u64 MASK = FULL - 1


# ---------------------------------------------------------------- bit I/O

cdef struct Writer:
    u8 *buf
    size_t cap
    size_t nbytes
    u64 total_bits
    unsigned int cur
    int fill

cdef int w_reset(Writer *w) except -1:
    w.nbytes = 0
    w.total_bits = 0
    w.cur = 0
    w.fill = 0
    if w.buf == NULL:
        w.cap = 4096
        w.buf = <u8*>malloc(w.cap)
        if w.buf == NULL:
            raise MemoryError()
    return 0

cdef inline int w_put(Writer *w, int bit) except -1:
    w.cur = (w.cur << 1) | <unsigned int>bit
    w.fill += 1
    w.total_bits += 1
    if w.fill == 8:
        if w.nbytes >= w.cap:
            w.cap = w.cap * 2
            w.buf = <u8*>realloc(w.buf, w.cap)
            if w.buf == NULL:
                raise MemoryError()
        w.buf[w.nbytes] = <u8>w.cur
        w.nbytes += 1
        w.cur = 0
        w.fill = 0
    return 0

cdef int w_finish(Writer *w) except -1:
    if w.fill:
        if w.nbytes >= w.cap:
            w.cap = w.cap * 2
            w.buf = <u8*>realloc(w.buf, w.cap)
            if w.buf == NULL:
                raise MemoryError()
        w.buf[w.nbytes] = <u8>(w.cur << (8 - w.fill))
        w.nbytes += 1
        w.cur = 0
        w.fill = 0
    return 0

cdef struct Reader:
    const u8 *data
    u64 nbits
    u64 pos

cdef inline int r_bit(Reader *r) noexcept nogil:
    cdef int bit
    if r.pos >= r.nbits:
        r.pos += 1
        return 0
    bit = (r.data[r.pos >> 3] >> (7 - (r.pos & 7))) & 1
    r.pos += 1
    return bit


# ------------------------------------------------------------- range coder

cdef struct Enc:
    u64 low
    u64 high
    u64 pending

cdef inline void enc_reset(Enc *e) noexcept nogil:
    e.low = 0
    e.high = MASK
    e.pending = 0

cdef inline int enc_emit(Enc *e, Writer *w, int bit) except -1:
    cdef int inv = bit ^ 1
    w_put(w, bit)
    while e.pending:
        w_put(w, inv)
        e.pending -= 1
    return 0

cdef inline int enc_symbol(Enc *e, Writer *w, u64 cum_lo, u64 cum_hi, u64 total) except -1:
    cdef u64 span = e.high - e.low + 1
    e.high = e.low + <u64>((<u128>span * cum_hi) / total) - 1
    e.low = e.low + <u64>((<u128>span * cum_lo) / total)
    while ((e.low ^ e.high) & HALF) == 0:
        enc_emit(e, w, <int>(e.low >> 61))
        e.low = (e.low << 1) & MASK
        e.high = ((e.high << 1) & MASK) | 1
    while (e.low & (~e.high) & QUARTER) != 0:
        e.pending += 1
        e.low = (e.low << 1) & (MASK >> 1)
        e.high = ((e.high << 1) & (MASK >> 1)) | HALF | 1
    return 0

cdef struct Dec:
    u64 low
    u64 high
    u64 code

cdef inline void dec_init(Dec *d, Reader *r) noexcept nogil:
    cdef int i
    cdef u64 code = 0
    d.low = 0
    d.high = MASK
    for i in range(STATE_BITS):
        code = (code << 1) | <u64>r_bit(r)
    d.code = code

cdef inline int dec_symbol(Dec *d, Reader *r, const i64 *cum, int vocab, u64 total) noexcept nogil:
    cdef u64 span = d.high - d.low + 1
    cdef u64 value = <u64>(((<u128>(d.code - d.low) + 1) * total - 1) / span)
    cdef int s = 0
    cdef u64 cum_lo, cum_hi
    while s < vocab - 1 and <u64>cum[s + 1] <= value:
        s += 1
    cum_lo = <u64>cum[s]
    cum_hi = <u64>cum[s + 1]
    d.high = d.low + <u64>((<u128>span * cum_hi) / total) - 1
    d.low = d.low + <u64>((<u128>span * cum_lo) / total)
    while ((d.low ^ d.high) & HALF) == 0:
        d.code = ((d.code << 1) & MASK) | <u64>r_bit(r)
        d.low = (d.low << 1) & MASK
        d.high = ((d.high << 1) & MASK) | 1
    while (d.low & (~d.high) & QUARTER) != 0:
        d.code = (d.code & HALF) | ((d.code << 1) & (MASK >> 1)) | <u64>r_bit(r)
        d.low = (d.low << 1) & (MASK >> 1)
        d.high = ((d.high << 1) & (MASK >> 1)) | HALF | 1
    return s


# ----------------------------------------------- adaptive PMF quantization

cdef int _cmp_desc_u64(const void *a, const void *b) noexcept nogil:
    cdef u64 x = (<const u64*>a)[0]
    cdef u64 y = (<const u64*>b)[0]
    if x > y:
        return -1
    if x < y:
        return 1
    return 0


cdef void quantize_counts(const int *row, int vocab, u64 total, i64 *freq, i64 *rem,
                          u64 *keys) noexcept nogil:
    # weights are counts+1; one reserved unit per symbol, then floor
    # allocation of total-vocab, then largest remainders (ties: lower id).
    # Must stay bit-identical to quantize_weights in models/pmf.py.
    cdef i64 wsum = 0
    cdef i64 sumbase = 0
    cdef i64 scale = <i64>total - vocab
    cdef i64 num, leftover
    cdef int i, j, best
    for i in range(vocab):
        wsum += row[i] + 1
    for i in range(vocab):
        num = (<i64>row[i] + 1) * scale
        freq[i] = 1 + num / wsum
        rem[i] = num % wsum
        sumbase += freq[i]
    leftover = <i64>total - sumbase
    if leftover <= 0:
        return
    if vocab <= 32:
        while leftover > 0:
            best = 0
            for j in range(1, vocab):
                if rem[j] > rem[best]:
                    best = j
            freq[best] += 1
            rem[best] = -1
            leftover -= 1
    else:
        # same bump set via one sort: key = (remainder desc, index asc)
        for i in range(vocab):
            keys[i] = (<u64>rem[i] << 12) | <u64>(4095 - i)
        qsort(keys, vocab, sizeof(u64), _cmp_desc_u64)
        for i in range(<int>leftover):
            freq[4095 - <int>(keys[i] & 0xFFF)] += 1


cdef inline void cum_from_freq(const i64 *freq, int vocab, i64 *cum) noexcept nogil:
    cdef int i
    cum[0] = 0
    for i in range(vocab):
        cum[i + 1] = cum[i] + freq[i]


cdef _validate_tokens(const u8[::1] tokens, int vocab):
    cdef i64 t
    for t in range(tokens.shape[0]):
        if tokens[t] >= vocab:
            raise ValueError(f"token {tokens[t]} out of range for vocab {vocab}")


# ------------------------------------------------------------ static model

def encode_static(const u8[::1] tokens, const i64[::1] cum, int precision_bits, i64 window_size):
    cdef i64 n = tokens.shape[0]
    cdef int vocab = cum.shape[0] - 1
    cdef u64 total = (<u64>1) << precision_bits
    _validate_tokens(tokens, vocab)
    cdef Writer w
    w.buf = NULL
    cdef Enc e
    cdef i64 start, end, t
    payload = bytearray()
    bitlens = []
    try:
        for start in range(0, n, window_size):
            end = min(start + window_size, n)
            w_reset(&w)
            enc_reset(&e)
            for t in range(start, end):
                enc_symbol(&e, &w, <u64>cum[tokens[t]], <u64>cum[tokens[t] + 1], total)
            enc_emit(&e, &w, 1)
            bits = w.total_bits
            w_finish(&w)
            payload += PyBytes_FromStringAndSize(<char*>w.buf, <Py_ssize_t>w.nbytes)
            bitlens.append(bits)
    finally:
        free(w.buf)
    return bytes(payload), np.asarray(bitlens, dtype=np.uint32)


def decode_static(const u8[::1] payload, const u32[::1] bitlens, i64 n_tokens,
                  const i64[::1] cum, int precision_bits, i64 window_size):
    cdef int vocab = cum.shape[0] - 1
    cdef u64 total = (<u64>1) << precision_bits
    out_arr = np.empty(n_tokens, dtype=np.uint8)
    cdef u8[::1] out = out_arr
    cdef Reader r
    cdef Dec d
    cdef i64 pos = 0, offset = 0, count, i, widx
    cdef u64 nbits
    for widx in range(bitlens.shape[0]):
        nbits = bitlens[widx]
        count = min(window_size, n_tokens - pos)
        r.data = &payload[offset] if payload.shape[0] else NULL
        r.nbits = nbits
        r.pos = 0
        dec_init(&d, &r)
        for i in range(count):
            out[pos] = <u8>dec_symbol(&d, &r, &cum[0], vocab, total)
            pos += 1
        offset += <i64>((nbits + 7) >> 3)
    return out_arr


# ---------------------------------------------------------- adaptive model

def encode_adaptive(const u8[::1] tokens, int vocab, int order, int precision_bits,
                    i64 window_size):
    cdef i64 n = tokens.shape[0]
    cdef u64 total = (<u64>1) << precision_bits
    cdef i64 ctx_space = 1
    cdef int i
    for i in range(order):
        ctx_space *= vocab + 1
    _validate_tokens(tokens, vocab)
    counts_arr = np.zeros(ctx_space * vocab, dtype=np.int32)
    cdef int[::1] counts = counts_arr
    cdef i64 *freq = <i64*>malloc(sizeof(i64) * vocab)
    cdef i64 *rem = <i64*>malloc(sizeof(i64) * vocab)
    cdef i64 *cum = <i64*>malloc(sizeof(i64) * (vocab + 1))
    cdef u64 *keys = <u64*>malloc(sizeof(u64) * vocab)
    cdef Writer w
    w.buf = NULL
    cdef Enc e
    cdef i64 start, end, t, ctx
    cdef i64 bos = ctx_space - 1
    cdef int tok
    payload = bytearray()
    bitlens = []
    if freq == NULL or rem == NULL or cum == NULL or keys == NULL:
        free(freq); free(rem); free(cum); free(keys)
        raise MemoryError()
    try:
        for start in range(0, n, window_size):
            end = min(start + window_size, n)
            w_reset(&w)
            enc_reset(&e)
            ctx = bos
            for t in range(start, end):
                tok = tokens[t]
                quantize_counts(&counts[ctx * vocab], vocab, total, freq, rem, keys)
                cum_from_freq(freq, vocab, cum)
                enc_symbol(&e, &w, <u64>cum[tok], <u64>cum[tok + 1], total)
                counts[ctx * vocab + tok] += 1
                if order:
                    ctx = (ctx * (vocab + 1) + tok) % ctx_space
            enc_emit(&e, &w, 1)
            bits = w.total_bits
            w_finish(&w)
            payload += PyBytes_FromStringAndSize(<char*>w.buf, <Py_ssize_t>w.nbytes)
            bitlens.append(bits)
    finally:
        free(w.buf)
        free(freq)
        free(rem)
        free(cum)
        free(keys)
    return bytes(payload), np.asarray(bitlens, dtype=np.uint32)


def decode_adaptive(const u8[::1] payload, const u32[::1] bitlens, i64 n_tokens,
                    int vocab, int order, int precision_bits, i64 window_size):
    cdef u64 total = (<u64>1) << precision_bits
    cdef i64 ctx_space = 1
    cdef int i
    for i in range(order):
        ctx_space *= vocab + 1
    counts_arr = np.zeros(ctx_space * vocab, dtype=np.int32)
    cdef int[::1] counts = counts_arr
    cdef i64 *freq = <i64*>malloc(sizeof(i64) * vocab)
    cdef i64 *rem = <i64*>malloc(sizeof(i64) * vocab)
    cdef i64 *cum = <i64*>malloc(sizeof(i64) * (vocab + 1))
    cdef u64 *keys = <u64*>malloc(sizeof(u64) * vocab)
    out_arr = np.empty(n_tokens, dtype=np.uint8)
    cdef u8[::1] out = out_arr
    cdef Reader r
    cdef Dec d
    cdef i64 pos = 0, offset = 0, count, widx, j, ctx
    cdef i64 bos = ctx_space - 1
    cdef int sym
    cdef u64 nbits
    if freq == NULL or rem == NULL or cum == NULL or keys == NULL:
        free(freq); free(rem); free(cum); free(keys)
        raise MemoryError()
    try:
        for widx in range(bitlens.shape[0]):
            nbits = bitlens[widx]
            count = min(window_size, n_tokens - pos)
            r.data = &payload[offset] if payload.shape[0] else NULL
            r.nbits = nbits
            r.pos = 0
            dec_init(&d, &r)
            ctx = bos
            for j in range(count):
                quantize_counts(&counts[ctx * vocab], vocab, total, freq, rem, keys)
                cum_from_freq(freq, vocab, cum)
                sym = dec_symbol(&d, &r, cum, vocab, total)
                out[pos] = <u8>sym
                pos += 1
                counts[ctx * vocab + sym] += 1
                if order:
                    ctx = (ctx * (vocab + 1) + sym) % ctx_space
            offset += <i64>((nbits + 7) >> 3)
    finally:
        free(freq)
        free(rem)
        free(cum)
        free(keys)
    return out_arr
