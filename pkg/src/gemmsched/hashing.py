"""MurmurHash3 x64 128-bit, in two interchangeable forms.

`murmur3_x64_128` is the portable pure-Python definition, matching the
canonical C++ implementation bit for bit (the test suite pins vectors
generated from it). The numba-compiled kernels below specialize the same
function for the library's 24-byte problem-size keys so a full filter-
bank lookup stays around a microsecond; they are optional and everything
degrades to the pure path when numba is unavailable.

All derived quantities use unsigned 64-bit wraparound arithmetic, so the
two forms agree exactly and results are platform-independent.
"""

from __future__ import annotations

import struct

import numpy as np

MASK64 = 2**64 - 1

_C1 = 0x87C37B91114253D5
_C2 = 0x4CF5AD432745937F
_F1 = 0xFF51AFD7ED558CCD
_F2 = 0xC4CEB9FE1A85EC53


def _rotl64(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def _fmix64(k: int) -> int:
    k ^= k >> 33
    k = (k * _F1) & MASK64
    k ^= k >> 33
    k = (k * _F2) & MASK64
    k ^= k >> 33
    return k


def murmur3_x64_128(data: bytes, seed: int) -> tuple[int, int]:
    """128-bit MurmurHash3, x64 variant, as two unsigned 64-bit halves."""
    h1 = h2 = seed & 0xFFFFFFFF
    length = len(data)
    nblocks = length // 16

    for i in range(nblocks):
        k1, k2 = struct.unpack_from("<QQ", data, i * 16)
        k1 = (k1 * _C1) & MASK64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * _C2) & MASK64
        h1 ^= k1
        h1 = _rotl64(h1, 27)
        h1 = (h1 + h2) & MASK64
        h1 = (h1 * 5 + 0x52DCE729) & MASK64
        k2 = (k2 * _C2) & MASK64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * _C1) & MASK64
        h2 ^= k2
        h2 = _rotl64(h2, 31)
        h2 = (h2 + h1) & MASK64
        h2 = (h2 * 5 + 0x38495AB5) & MASK64

    tail = data[nblocks * 16 :]
    tl = len(tail)
    if tl >= 9:
        k2 = 0
        for i in range(tl - 1, 7, -1):
            k2 = (k2 << 8) | tail[i]
        k2 = (k2 * _C2) & MASK64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * _C1) & MASK64
        h2 ^= k2
    if tl > 0:
        k1 = 0
        for i in range(min(tl, 8) - 1, -1, -1):
            k1 = (k1 << 8) | tail[i]
        k1 = (k1 * _C1) & MASK64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * _C2) & MASK64
        h1 ^= k1

    h1 ^= length
    h2 ^= length
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    h1 = _fmix64(h1)
    h2 = _fmix64(h2)
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    return h1, h2


try:
    from numba import int64, njit, types, uint8, uint64

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if HAVE_NUMBA:
    _U = np.uint64
    _NC1 = _U(_C1)
    _NC2 = _U(_C2)
    _NF1 = _U(_F1)
    _NF2 = _U(_F2)
    _N5 = _U(5)
    _NA1 = _U(0x52DCE729)
    _NA2 = _U(0x38495AB5)
    _R27 = _U(27)
    _R31 = _U(31)
    _R33 = _U(33)
    _S33 = _U(33)
    _W64 = _U(64)
    _LEN24 = _U(24)
    _ONE = _U(1)
    _THREE = _U(3)
    _SEVEN = _U(7)

    @njit(uint64(uint64), cache=True, inline="always")
    def _jf(k):
        k ^= k >> _S33
        k *= _NF1
        k ^= k >> _S33
        k *= _NF2
        k ^= k >> _S33
        return k

    @njit(cache=True, inline="always")
    def _hash24_jit(m, n, k, seed):
        # MurmurHash3 x64_128 of the 24-byte little-endian (m, n, k) key:
        # one 16-byte body block (m, n) and an 8-byte tail (k).
        h1 = seed
        h2 = seed
        k1 = m * _NC1
        k1 = (k1 << _R31) | (k1 >> (_W64 - _R31))
        k1 *= _NC2
        h1 ^= k1
        h1 = (h1 << _R27) | (h1 >> (_W64 - _R27))
        h1 += h2
        h1 = h1 * _N5 + _NA1
        k2 = n * _NC2
        k2 = (k2 << _R33) | (k2 >> (_W64 - _R33))
        k2 *= _NC1
        h2 ^= k2
        h2 = (h2 << _R31) | (h2 >> (_W64 - _R31))
        h2 += h1
        h2 = h2 * _N5 + _NA2
        t1 = k * _NC1
        t1 = (t1 << _R31) | (t1 >> (_W64 - _R31))
        t1 *= _NC2
        h1 ^= t1
        h1 ^= _LEN24
        h2 ^= _LEN24
        h1 += h2
        h2 += h1
        h1 = _jf(h1)
        h2 = _jf(h2)
        h1 += h2
        h2 += h1
        return h1, h2

    # Explicit signatures: plain Python ints unbox straight to uint64, so
    # the hot query path pays no per-call numpy scalar wrapping.
    @njit(
        types.UniTuple(uint64, 2)(uint64, uint64, uint64, uint64),
        cache=True,
    )
    def _hash24_pair(m, n, k, seed):
        return _hash24_jit(m, n, k, seed)

    @njit(
        int64(uint8[:, :], uint64[:], uint64, int64, uint64, uint64, uint64),
        cache=True,
    )
    def _query_mask_jit(bits, seeds, m_bits, k_hashes, m, n, k):
        # bits: (n_filters, bytes) uint8; returns a hit bitmask over filters.
        mask = 0
        for f in range(seeds.shape[0]):
            h1, h2 = _hash24_jit(m, n, k, seeds[f])
            hit = True
            for i in range(k_hashes):
                idx = (h1 + _U(i) * h2) % m_bits
                if not (bits[f, idx >> _THREE] & (_ONE << (idx & _SEVEN))):
                    hit = False
                    break
            if hit:
                mask |= 1 << f
        return mask

    def hash24(m: int, n: int, k: int, seed: int) -> tuple[int, int]:
        """Jitted murmur of the (m, n, k) key; equals the pure definition."""
        h1, h2 = _hash24_pair(m, n, k, seed)
        return int(h1), int(h2)

    def query_mask(
        bits: np.ndarray,
        seeds: np.ndarray,
        m_bits: int,
        k_hashes: int,
        m: int,
        n: int,
        k: int,
    ) -> int:
        """All-filters membership test; bit f set iff filter f reports present."""
        return int(_query_mask_jit(bits, seeds, m_bits, k_hashes, m, n, k))

else:  # pragma: no cover
    _query_mask_jit = None
    hash24 = None
    query_mask = None
