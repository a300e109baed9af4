"""Core value types shared by the scheduling, cost, and selection layers.

Everything here is an immutable value object: problem dimensions, tile
shapes, the hardware model, scheduling policies, and derived grid
geometry. No I/O, no mutation; instances are safe to share across
threads and to use as dict keys.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

_U64_MAX = 2**64 - 1

KEY_BYTES = 24


class PolicyKind(Enum):
    """The three families of work-assignment policies."""

    DATA_PARALLEL = "data-parallel"
    HYBRID = "hybrid"
    ALL_STREAM_K = "all-streamk"


@dataclass(frozen=True, slots=True)
class ProblemSize:
    """GEMM dimensions: C[m, n] = A[m, k] @ B[k, n]."""

    m: int
    n: int
    k: int

    def __post_init__(self) -> None:
        for name in ("m", "n", "k"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
            if not 1 <= v <= _U64_MAX:
                raise ValueError(f"{name} must be in [1, 2^64), got {v}")

    def key(self) -> bytes:
        return encode_key(self)


def encode_key(size: ProblemSize) -> bytes:
    """Canonical 24-byte key for a problem size.

    Layout is m, n, k as unsigned 64-bit little-endian words, in that
    order. Injective over all valid sizes and stable across platforms;
    this is the exact byte sequence hashed by the selection filters.
    """
    return struct.pack("<QQQ", size.m, size.n, size.k)


@dataclass(frozen=True, slots=True)
class TileShape:
    """Output-tile block sizes (blk_m x blk_n) and the K-slice depth blk_k."""

    blk_m: int
    blk_n: int
    blk_k: int

    def __post_init__(self) -> None:
        for name in ("blk_m", "blk_n", "blk_k"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")


@dataclass(frozen=True, slots=True)
class HardwareModel:
    """Compute-unit count and resident workgroups per CU.

    The persistent-kernel grid size is cu_count * occupancy. The default
    CU count matches a single MI250X chiplet.
    """

    cu_count: int = 104
    occupancy: int = 1

    def __post_init__(self) -> None:
        for name in ("cu_count", "occupancy"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")


@dataclass(frozen=True, slots=True)
class Policy:
    """One scheduling policy.

    DataParallel and AllStreamK carry no parameters. Hybrid carries the
    number of Stream-K batches (>= 1) and whether the Stream-K phase is
    scheduled before the data-parallel phase within each workgroup.

    The canonical family has seven members with ordinals 0..6:
    0 = data-parallel, 1..5 = hybrid with that many SK-first batches,
    6 = all-Stream-K. Other hybrids (more batches, or DP-first ordering)
    are constructible but carry no canonical ordinal.
    """

    kind: PolicyKind
    sk_batches: int = 0
    sk_first: bool = False

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.HYBRID:
            if self.sk_batches < 1:
                raise ValueError("hybrid policy needs sk_batches >= 1")
        elif self.sk_batches != 0 or self.sk_first:
            raise ValueError(f"{self.kind.value} policy carries no parameters")

    @staticmethod
    def data_parallel() -> "Policy":
        return Policy(PolicyKind.DATA_PARALLEL)

    @staticmethod
    def hybrid(sk_batches: int, sk_first: bool = True) -> "Policy":
        return Policy(PolicyKind.HYBRID, sk_batches, sk_first)

    @staticmethod
    def all_stream_k() -> "Policy":
        return Policy(PolicyKind.ALL_STREAM_K)

    @property
    def ordinal(self) -> int | None:
        """Canonical ordinal 0..6, or None for non-canonical policies."""
        if self.kind is PolicyKind.DATA_PARALLEL:
            return 0
        if self.kind is PolicyKind.ALL_STREAM_K:
            return 6
        if self.sk_first and 1 <= self.sk_batches <= 5:
            return self.sk_batches
        return None

    @property
    def uses_stream_k(self) -> bool:
        return self.kind is not PolicyKind.DATA_PARALLEL

    def sort_key(self) -> tuple[int, int, int]:
        """Total order consistent with canonical ordinals; used for tie-breaks."""
        kind_rank = {
            PolicyKind.DATA_PARALLEL: 0,
            PolicyKind.HYBRID: 1,
            PolicyKind.ALL_STREAM_K: 2,
        }[self.kind]
        return (kind_rank, self.sk_batches, 0 if self.sk_first else 1)

    @property
    def label(self) -> str:
        if self.kind is PolicyKind.DATA_PARALLEL:
            return "data-parallel"
        if self.kind is PolicyKind.ALL_STREAM_K:
            return "all-streamk"
        suffix = "" if self.sk_first else "-dpfirst"
        return f"hybrid{self.sk_batches}{suffix}"

    def __str__(self) -> str:
        return self.label


def canonical_policies() -> list[Policy]:
    """The seven-policy family, in ordinal order 0..6."""
    return [
        Policy.data_parallel(),
        *(Policy.hybrid(s, sk_first=True) for s in range(1, 6)),
        Policy.all_stream_k(),
    ]


def policy_from_ordinal(ordinal: int) -> Policy:
    """Inverse of Policy.ordinal over the canonical family."""
    if not 0 <= ordinal <= 6:
        raise ValueError(f"canonical ordinal must be 0..6, got {ordinal}")
    return canonical_policies()[ordinal]


@dataclass(frozen=True, slots=True)
class GridInfo:
    """Tile-grid geometry derived from a problem size and tile shape.

    m_tiles = ceil(m / blk_m), n_tiles = ceil(n / blk_n),
    iters_per_tile = ceil(k / blk_k), total_tiles = m_tiles * n_tiles,
    total_iters = total_tiles * iters_per_tile.
    """

    m_tiles: int
    n_tiles: int
    iters_per_tile: int
    total_tiles: int
    total_iters: int
