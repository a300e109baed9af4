"""Bloom-filter bank mapping problem sizes to candidate scheduling policies.

One filter per policy: tuning inserts each size's winning policy into
that policy's filter, and a query returns every policy whose filter
reports the size present. False positives merely cost an extra candidate
evaluation; false negatives cannot happen, so sieve-guided tuning never
loses a winner.

All filters in a bank share the (m_bits, k_hashes) geometry derived from
the design capacity and false-positive target; only the per-filter hash
seed differs. Keys are the canonical 24-byte size encoding, hashed once
per filter with MurmurHash3 x64_128; the k probe indices derive from the
two 64-bit halves by double hashing, (h1 + i*h2) mod 2^64 mod m_bits.

Banks serialize to a versioned little-endian binary format with a CRC32
trailer (see `SieveBank.to_bytes`), round-tripping bit for bit.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import hashing
from .types import KEY_BYTES, Policy, PolicyKind, canonical_policies, encode_key
from .types import ProblemSize

MAGIC = b"SKPS"
FORMAT_VERSION = 1

DEFAULT_CAPACITY = 10_000
DEFAULT_FP_TARGET = 0.01

_FILTER_HEADER = struct.Struct("<BBBBIQIQ")
_MAX_HASHES = 32


class SieveFormatError(ValueError):
    """Base error for malformed serialized banks."""


class BadMagicError(SieveFormatError):
    pass


class UnsupportedVersionError(SieveFormatError):
    pass


class ChecksumError(SieveFormatError):
    pass


class TruncatedError(SieveFormatError):
    pass


def filter_params(capacity: int, fp_target: float) -> tuple[int, int]:
    """Standard Bloom sizing for a design load and false-positive target.

    The raw bit count is ceil(-capacity * ln(fp) / ln(2)^2); the probe
    count comes from that raw size, then the bit array rounds up to a
    multiple of 64. Probes are clamped to [1, 32].
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if not 0.0 < fp_target < 1.0:
        raise ValueError("fp_target must be in (0, 1)")
    m_raw = math.ceil(-capacity * math.log(fp_target) / (math.log(2) ** 2))
    k = math.floor((m_raw / capacity) * math.log(2) + 0.5)
    k_hashes = max(1, min(_MAX_HASHES, k))
    m_bits = ((m_raw + 63) // 64) * 64
    return m_bits, k_hashes


def filter_seed(index: int) -> int:
    """Deterministic distinct 32-bit seed for the filter at a bank position."""
    return (0x9E3779B9 * (index + 1)) & 0xFFFFFFFF


def hash_probes(key: bytes, seed: int, m_bits: int, k_hashes: int) -> list[int]:
    """The k bit indices probed for a key.

    One murmur evaluation yields halves (h1, h2); probe i is
    (h1 + i*h2) mod 2^64 mod m_bits. Identical across platforms.
    """
    if len(key) != KEY_BYTES:
        raise ValueError(f"key must be {KEY_BYTES} bytes, got {len(key)}")
    if m_bits < 1 or k_hashes < 1:
        raise ValueError("m_bits and k_hashes must be >= 1")
    h1, h2 = hashing.murmur3_x64_128(key, seed)
    return [((h1 + i * h2) & hashing.MASK64) % m_bits for i in range(k_hashes)]


def predicted_fp_rate(m_bits: int, k_hashes: int, n_inserted: int) -> float:
    """Textbook false-positive estimate (1 - e^(-k*n/m))^k."""
    if n_inserted <= 0:
        return 0.0
    return (1.0 - math.exp(-k_hashes * n_inserted / m_bits)) ** k_hashes


class BloomFilter:
    """One packed-bit filter. Bit i lives in byte i//8 at position i%8 (LSB-first)."""

    __slots__ = ("m_bits", "k_hashes", "seed", "n_inserted", "bits")

    def __init__(
        self,
        m_bits: int,
        k_hashes: int,
        seed: int,
        *,
        bits: np.ndarray | None = None,
        n_inserted: int = 0,
    ):
        if m_bits < 64 or m_bits % 64 != 0:
            raise ValueError("m_bits must be a positive multiple of 64")
        if not 1 <= k_hashes <= _MAX_HASHES:
            raise ValueError(f"k_hashes must be in [1, {_MAX_HASHES}]")
        if not 0 <= seed <= 0xFFFFFFFF:
            raise ValueError("seed must fit in 32 bits")
        nbytes = m_bits // 8
        if bits is None:
            bits = np.zeros(nbytes, dtype=np.uint8)
        else:
            bits = np.asarray(bits, dtype=np.uint8)
            if bits.shape != (nbytes,):
                raise ValueError(f"bit array must have {nbytes} bytes")
        self.m_bits = m_bits
        self.k_hashes = k_hashes
        self.seed = seed
        self.n_inserted = n_inserted
        self.bits = bits

    @classmethod
    def for_capacity(
        cls, capacity: int, fp_target: float, seed: int
    ) -> "BloomFilter":
        m_bits, k_hashes = filter_params(capacity, fp_target)
        return cls(m_bits, k_hashes, seed)

    def probes(self, key: bytes) -> list[int]:
        return hash_probes(key, self.seed, self.m_bits, self.k_hashes)

    def insert(self, key: bytes) -> None:
        for idx in self.probes(key):
            self.bits[idx >> 3] |= np.uint8(1 << (idx & 7))
        self.n_inserted += 1

    def contains(self, key: bytes) -> bool:
        for idx in self.probes(key):
            if not (self.bits[idx >> 3] & (1 << (idx & 7))):
                return False
        return True

    __contains__ = contains

    def predicted_fp_rate(self, n: int | None = None) -> float:
        return predicted_fp_rate(
            self.m_bits, self.k_hashes, self.n_inserted if n is None else n
        )


def _policy_tag(policy: Policy) -> tuple[int, int, int]:
    """(tag, sk_batches, sk_first) bytes for the serialized filter header.

    The tag equals the canonical ordinal for canonical policies (0 for
    data-parallel, the batch count for SK-first hybrids, 6 for
    all-Stream-K); non-canonical hybrids keep tag = batch count, with the
    explicit sk_batches/sk_first bytes carrying the identity.
    """
    if policy.kind is PolicyKind.DATA_PARALLEL:
        return 0, 0, 0
    if policy.kind is PolicyKind.ALL_STREAM_K:
        return 6, 0, 0
    if policy.sk_batches > 0xFF:
        raise ValueError("sk_batches too large to serialize")
    return policy.sk_batches, policy.sk_batches, 1 if policy.sk_first else 0


def _policy_from_tag(tag: int, sk_batches: int, sk_first: int) -> Policy:
    if sk_batches == 0:
        if tag == 0:
            return Policy.data_parallel()
        if tag == 6:
            return Policy.all_stream_k()
        raise SieveFormatError(f"unrecognized parameterless policy tag {tag}")
    if tag != sk_batches:
        raise SieveFormatError(
            f"inconsistent hybrid header: tag {tag}, sk_batches {sk_batches}"
        )
    return Policy.hybrid(sk_batches, sk_first=bool(sk_first))


class SieveBank:
    """Ordered (policy, filter) pairs with a shared geometry.

    Queries on a bank that is no longer being inserted into are safe from
    any number of concurrent readers; insertion requires exclusive
    access.
    """

    def __init__(
        self,
        policies: list[Policy] | None = None,
        capacity: int = DEFAULT_CAPACITY,
        fp_target: float = DEFAULT_FP_TARGET,
        *,
        filters: list[tuple[Policy, BloomFilter]] | None = None,
    ):
        if filters is not None:
            if policies is not None:
                raise ValueError("pass either policies or prebuilt filters")
            self._check_filters(filters)
            self.filters = list(filters)
        else:
            if policies is None:
                policies = canonical_policies()
            if len(set(policies)) != len(policies):
                raise ValueError("policies must be distinct")
            if not policies:
                raise ValueError("bank needs at least one policy")
            m_bits, k_hashes = filter_params(capacity, fp_target)
            self.filters = [
                (p, BloomFilter(m_bits, k_hashes, filter_seed(i)))
                for i, p in enumerate(policies)
            ]
        self.capacity = capacity
        self.fp_target = fp_target
        self._index = {p: f for p, f in self.filters}
        self._fast = None

    @staticmethod
    def _check_filters(filters: list[tuple[Policy, BloomFilter]]) -> None:
        if not filters:
            raise ValueError("bank needs at least one policy")
        policies = [p for p, _ in filters]
        if len(set(policies)) != len(policies):
            raise ValueError("policies must be distinct")
        geoms = {(f.m_bits, f.k_hashes) for _, f in filters}
        if len(geoms) != 1:
            raise ValueError("all filters in a bank must share (m_bits, k_hashes)")
        seeds = {f.seed for _, f in filters}
        if len(seeds) != len(filters):
            raise ValueError("filter seeds must be distinct")

    @classmethod
    def canonical(
        cls,
        capacity: int = DEFAULT_CAPACITY,
        fp_target: float = DEFAULT_FP_TARGET,
    ) -> "SieveBank":
        return cls(canonical_policies(), capacity, fp_target)

    @property
    def policies(self) -> list[Policy]:
        return [p for p, _ in self.filters]

    @property
    def m_bits(self) -> int:
        return self.filters[0][1].m_bits

    @property
    def k_hashes(self) -> int:
        return self.filters[0][1].k_hashes

    def filter_for(self, policy: Policy) -> BloomFilter:
        try:
            return self._index[policy]
        except KeyError:
            raise KeyError(f"policy {policy} not in bank") from None

    def insert(self, size: ProblemSize, policy: Policy) -> None:
        """Record that `policy` is a candidate for `size`."""
        self.filter_for(policy).insert(encode_key(size))
        self._fast = None

    def query(self, size: ProblemSize) -> list[Policy]:
        """Candidate policies for a size, in bank order.

        Contains every policy ever inserted for this size (no false
        negatives), possibly plus false-positive extras.
        """
        fast = self._fast_state()
        if fast is not None:
            bits2d, seeds, m_bits_u64, k_hashes, mask_cache = fast
            mask = hashing._query_mask_jit(
                bits2d, seeds, m_bits_u64, k_hashes, size.m, size.n, size.k
            )
            hit = mask_cache.get(mask)
            if hit is None:
                hit = [p for f, (p, _) in enumerate(self.filters) if mask & (1 << f)]
                mask_cache[mask] = hit
            return hit.copy()
        key = encode_key(size)
        return [p for p, filt in self.filters if filt.contains(key)]

    def _fast_state(self):
        # Rebuilt lazily after inserts; numba path handles up to 63 filters.
        # Concurrent readers may race to build it, but both produce the
        # same value and assignment is atomic, so the state stays valid.
        if self._fast is None:
            if hashing._query_mask_jit is None or len(self.filters) > 63:
                return None
            bits2d = np.stack([f.bits for _, f in self.filters])
            seeds = np.array([f.seed for _, f in self.filters], dtype=np.uint64)
            self._fast = (bits2d, seeds, np.uint64(self.m_bits), self.k_hashes, {})
        return self._fast

    # -- serialization ----------------------------------------------------
    #
    # Little-endian throughout:
    #   magic "SKPS" | version u16 | policy_count u16
    #   per filter, in bank order:
    #     policy_tag u8 | sk_batches u8 | sk_first u8 | reserved u8
    #     seed u32 | m_bits u64 | k_hashes u32 | n_inserted u64
    #     bit array, m_bits/8 bytes
    #   crc32 u32 over every preceding byte

    def to_bytes(self) -> bytes:
        buf = bytearray()
        buf += MAGIC
        buf += struct.pack("<HH", FORMAT_VERSION, len(self.filters))
        for policy, f in self.filters:
            tag, sk_b, sk_f = _policy_tag(policy)
            buf += _FILTER_HEADER.pack(
                tag, sk_b, sk_f, 0, f.seed, f.m_bits, f.k_hashes, f.n_inserted
            )
            buf += f.bits.tobytes()
        buf += struct.pack("<I", zlib.crc32(bytes(buf)))
        return bytes(buf)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SieveBank":
        if len(data) < 12:
            raise TruncatedError(f"{len(data)} bytes is too short for a sieve file")
        if data[:4] != MAGIC:
            raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
        version, count = struct.unpack_from("<HH", data, 4)
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(
                f"unsupported format version {version}, expected {FORMAT_VERSION}"
            )
        if count < 1:
            raise SieveFormatError("bank must contain at least one filter")

        off = 8
        filters: list[tuple[Policy, BloomFilter]] = []
        for _ in range(count):
            if off + _FILTER_HEADER.size > len(data) - 4:
                raise TruncatedError("file ends inside a filter header")
            tag, sk_b, sk_f, reserved, seed, m_bits, k_hashes, n_inserted = (
                _FILTER_HEADER.unpack_from(data, off)
            )
            off += _FILTER_HEADER.size
            if reserved != 0:
                raise SieveFormatError("reserved header byte must be zero")
            if m_bits < 64 or m_bits % 64 != 0:
                raise SieveFormatError(f"invalid m_bits {m_bits}")
            if not 1 <= k_hashes <= _MAX_HASHES:
                raise SieveFormatError(f"invalid k_hashes {k_hashes}")
            nbytes = m_bits // 8
            if off + nbytes > len(data) - 4:
                raise TruncatedError("file ends inside a filter bit array")
            bits = np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=off).copy()
            off += nbytes
            policy = _policy_from_tag(tag, sk_b, sk_f)
            filters.append(
                (policy, BloomFilter(m_bits, k_hashes, seed, bits=bits,
                                     n_inserted=n_inserted))
            )

        if off + 4 != len(data):
            raise SieveFormatError(
                f"{len(data) - off - 4} unexpected trailing byte(s)"
            )
        (stored_crc,) = struct.unpack_from("<I", data, off)
        actual_crc = zlib.crc32(data[:off])
        if stored_crc != actual_crc:
            raise ChecksumError(
                f"crc mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
            )
        bank = cls.__new__(cls)
        cls._check_filters(filters)
        bank.filters = filters
        bank.capacity = None
        bank.fp_target = None
        bank._index = {p: f for p, f in filters}
        bank._fast = None
        return bank

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "SieveBank":
        return cls.from_bytes(Path(path).read_bytes())


@dataclass(frozen=True, slots=True)
class EliminationStats:
    """How much candidate evaluation the bank eliminates over a record set.

    eliminated_fraction is the share of non-baseline policy evaluations
    skipped; false_negatives counts records whose winner the sieve-guided
    evaluation would have missed (guaranteed zero when winners were
    inserted); evaluations_saved is the absolute count skipped.
    """

    eliminated_fraction: float
    false_negatives: int
    evaluations_saved: int


def elimination_stats(
    bank: SieveBank,
    records,
    baseline: Policy | None = None,
) -> EliminationStats:
    """Evaluate the sieve-guided tuning workflow over tuning records.

    For each record the guided tuner evaluates query(size) plus the
    always-evaluated baseline; everything else is eliminated.
    """
    if not records:
        raise ValueError("records must be nonempty")
    if baseline is None:
        baseline = Policy.data_parallel()
    if baseline not in bank._index:
        raise KeyError(f"baseline {baseline} not in bank")
    policy_count = len(bank.filters)
    possible = len(records) * (policy_count - 1)
    evaluated = 0
    false_negatives = 0
    for rec in records:
        candidates = set(bank.query(rec.size))
        candidates.add(baseline)
        evaluated += len(candidates) - 1
        if rec.winner not in candidates:
            false_negatives += 1
    saved = possible - evaluated
    fraction = saved / possible if possible > 0 else 1.0
    return EliminationStats(fraction, false_negatives, saved)
