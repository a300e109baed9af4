"""Exact per-workgroup work assignment for the seven-policy family.

A schedule assigns every (tile, k-iteration) pair of the output grid to
exactly one workgroup, as an ordered list of work items per workgroup.
The unit of work is one blk_k slice of one output tile.

Three constructions are supported:

* data-parallel: whole tiles round-robin across workgroups, one tile per
  workgroup per round;
* all-Stream-K: the flattened iteration space split evenly across
  workgroups, tiles shared at the split points;
* hybrid(s): the trailing tiles (the final, possibly partial wave plus
  s-1 full waves) are Stream-K'd across all workgroups while the leading
  tiles, always a whole number of full waves, run data-parallel.

`validate_schedule` independently checks the exactly-once property by an
interval sweep, so constructed schedules can be audited rather than
trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .types import (
    GridInfo,
    HardwareModel,
    Policy,
    PolicyKind,
    ProblemSize,
    TileShape,
)

_U64_MAX = 2**64 - 1


class WriteMode(Enum):
    FULL_STORE = "full-store"
    ATOMIC_PARTIAL = "atomic-partial"


class Phase(Enum):
    STREAM_K = "streamk"
    DATA_PARALLEL = "data-parallel"


@dataclass(frozen=True, slots=True)
class WorkItem:
    """A contiguous run of k-iterations of one tile, assigned to one workgroup.

    Covers local iterations [local_iter_begin, local_iter_end) of tile
    tile_idx (linear, row-major over the tile grid). FULL_STORE iff the
    run is the tile's entire iteration range; partial runs must combine
    into the output atomically.
    """

    tile_idx: int
    local_iter_begin: int
    local_iter_end: int
    write_mode: WriteMode
    phase: Phase

    def __post_init__(self) -> None:
        if self.tile_idx < 0:
            raise ValueError(f"tile_idx must be >= 0, got {self.tile_idx}")
        if not 0 <= self.local_iter_begin < self.local_iter_end:
            raise ValueError(
                f"empty or inverted iteration range "
                f"[{self.local_iter_begin}, {self.local_iter_end})"
            )

    @property
    def iterations(self) -> int:
        return self.local_iter_end - self.local_iter_begin


@dataclass(frozen=True)
class Schedule:
    """Per-workgroup ordered work assignment for one (problem, tile, g, policy)."""

    grid: GridInfo
    g: int
    policy: Policy
    assignments: tuple[tuple[WorkItem, ...], ...]

    def items(self):
        """All work items in scheduled order (workgroup-major)."""
        for wg_items in self.assignments:
            yield from wg_items


class IterLocation(NamedTuple):
    tile_idx: int
    tile_m: int
    tile_n: int
    local_iter: int


@dataclass(frozen=True, slots=True)
class CoverageReport:
    """Result of the exactly-once audit.

    duplicates counts (tile, iteration) pairs covered more than once
    (total excess multiplicity); gaps counts pairs never covered.
    """

    covered_once: bool
    duplicates: int
    gaps: int


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def grid_info(size: ProblemSize, tile: TileShape) -> GridInfo:
    """Tile-grid geometry for a problem size under a tile shape."""
    m_tiles = _ceil_div(size.m, tile.blk_m)
    n_tiles = _ceil_div(size.n, tile.blk_n)
    iters_per_tile = _ceil_div(size.k, tile.blk_k)
    total_tiles = m_tiles * n_tiles
    total_iters = total_tiles * iters_per_tile
    if total_iters > _U64_MAX:
        raise ValueError("problem too large: total iteration count exceeds 2^64-1")
    return GridInfo(m_tiles, n_tiles, iters_per_tile, total_tiles, total_iters)


def grid_size(hw: HardwareModel) -> int:
    """Workgroup count of the persistent launch: cu_count * occupancy."""
    return hw.cu_count * hw.occupancy


def streamk_ranges(total_iters: int, g: int) -> list[tuple[int, int]]:
    """Even split of [0, total_iters) into g ordered half-open ranges.

    Range x is [x*ipw, min((x+1)*ipw, total_iters)) with
    ipw = ceil(total_iters / g); trailing ranges may be empty.
    """
    if total_iters < 0:
        raise ValueError("total_iters must be >= 0")
    if g < 1:
        raise ValueError("g must be >= 1")
    ipw = _ceil_div(total_iters, g)
    ranges = []
    for x in range(g):
        lo = min(x * ipw, total_iters)
        hi = min((x + 1) * ipw, total_iters)
        ranges.append((lo, hi))
    return ranges


def locate_iter(iteration: int, grid: GridInfo) -> IterLocation:
    """Map a flat iteration index to (tile_idx, tile_m, tile_n, local_iter)."""
    if not 0 <= iteration < grid.total_iters:
        raise ValueError(
            f"iteration {iteration} out of range [0, {grid.total_iters})"
        )
    tile_idx = iteration // grid.iters_per_tile
    local_iter = iteration - tile_idx * grid.iters_per_tile
    tile_m = tile_idx // grid.n_tiles
    tile_n = tile_idx % grid.n_tiles
    return IterLocation(tile_idx, tile_m, tile_n, local_iter)


def hybrid_sk_tiles(total_tiles: int, g: int, sk_batches: int) -> int:
    """Tile count of the Stream-K region for a hybrid policy.

    The region is the final (possibly partial) wave plus sk_batches - 1
    full waves, clamped to the whole grid. When the last wave is full, a
    full wave is still Stream-K'd, so hybrid(1) stays distinct from
    data-parallel. The data-parallel remainder is always a whole number
    of full waves.
    """
    r = total_tiles % g
    return min(total_tiles, (sk_batches - 1) * g + (r if r > 0 else g))


def _full_tile_item(grid: GridInfo, tile_idx: int, phase: Phase) -> WorkItem:
    return WorkItem(tile_idx, 0, grid.iters_per_tile, WriteMode.FULL_STORE, phase)


def _round_robin_items(
    grid: GridInfo, n_tiles: int, g: int
) -> list[list[WorkItem]]:
    """Tiles [0, n_tiles) whole, tile t to workgroup t mod g in round t // g."""
    assignments: list[list[WorkItem]] = [[] for _ in range(g)]
    for t in range(n_tiles):
        assignments[t % g].append(_full_tile_item(grid, t, Phase.DATA_PARALLEL))
    return assignments


def _streamk_region_items(
    grid: GridInfo, first_tile: int, n_tiles: int, g: int
) -> list[list[WorkItem]]:
    """Split tiles [first_tile, first_tile + n_tiles) evenly by iteration.

    The region's n_tiles * iters_per_tile iterations are divided by
    streamk_ranges and each workgroup's contiguous range is cut at tile
    boundaries into work items.
    """
    ipt = grid.iters_per_tile
    assignments: list[list[WorkItem]] = []
    for lo, hi in streamk_ranges(n_tiles * ipt, g):
        items: list[WorkItem] = []
        cur = lo
        while cur < hi:
            t_rel = cur // ipt
            tile_end = (t_rel + 1) * ipt
            seg_end = min(hi, tile_end)
            begin = cur - t_rel * ipt
            end = seg_end - t_rel * ipt
            mode = (
                WriteMode.FULL_STORE
                if begin == 0 and end == ipt
                else WriteMode.ATOMIC_PARTIAL
            )
            items.append(WorkItem(first_tile + t_rel, begin, end, mode, Phase.STREAM_K))
            cur = seg_end
        assignments.append(items)
    return assignments


def build_schedule(
    size: ProblemSize, tile: TileShape, hw: HardwareModel, policy: Policy
) -> Schedule:
    """Construct the exact work assignment for one policy.

    The result covers every (tile, k-iteration) pair exactly once; within
    a workgroup, items appear in execution order (for SK-first hybrids
    the Stream-K items precede the data-parallel items).
    """
    grid = grid_info(size, tile)
    g = grid_size(hw)
    T = grid.total_tiles

    if policy.kind is PolicyKind.DATA_PARALLEL:
        per_wg = _round_robin_items(grid, T, g)
    elif policy.kind is PolicyKind.ALL_STREAM_K:
        per_wg = _streamk_region_items(grid, 0, T, g)
    else:
        sk_tiles = hybrid_sk_tiles(T, g, policy.sk_batches)
        dp_tiles = T - sk_tiles
        dp_part = _round_robin_items(grid, dp_tiles, g)
        sk_part = _streamk_region_items(grid, dp_tiles, sk_tiles, g)
        if policy.sk_first:
            per_wg = [sk + dp for sk, dp in zip(sk_part, dp_part)]
        else:
            per_wg = [dp + sk for sk, dp in zip(sk_part, dp_part)]

    assignments = tuple(tuple(items) for items in per_wg)
    return Schedule(grid, g, policy, assignments)


def validate_schedule(sched: Schedule) -> CoverageReport:
    """Audit exactly-once coverage by an interval sweep.

    Work items are mapped to intervals of the flat iteration space and
    swept; any multiplicity above one counts toward duplicates, any
    uncovered length toward gaps. Runs in O(items log items), independent
    of the iteration count.
    """
    ipt = sched.grid.iters_per_tile
    total = sched.grid.total_iters

    events: list[tuple[int, int]] = []
    for item in sched.items():
        start = item.tile_idx * ipt + item.local_iter_begin
        end = item.tile_idx * ipt + item.local_iter_end
        events.append((start, 1))
        events.append((end, -1))
    events.sort()

    covered = 0
    duplicates = 0
    depth = 0
    prev = 0
    for pos, delta in events:
        span = pos - prev
        if span > 0 and depth > 0:
            # Coverage falling outside [0, total) is pure violation.
            in_range = min(pos, total) - min(prev, total)
            covered += in_range
            duplicates += (depth - 1) * in_range + depth * (span - in_range)
        prev = pos
        depth += delta

    gaps = total - covered
    return CoverageReport(duplicates == 0 and gaps == 0, duplicates, gaps)
