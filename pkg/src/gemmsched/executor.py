"""Execute schedules as real matrix multiplications and check them.

This module exists for correctness, not speed: any schedule can be run
against host matrices and compared with a reference GEMM. Matrices are
dense row-major float64 arrays. Test inputs are integer-valued so every
partial accumulation is exact, which makes the order-independence of the
atomic-add combination literally checkable (bitwise-equal results under
any interleaving of work items).

alpha = 1, beta = 0 throughout: C = A @ B, nothing more.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .scheduler import Schedule, build_schedule, grid_info
from .types import HardwareModel, Policy, ProblemSize, TileShape


@dataclass(frozen=True, slots=True)
class EquivalenceReport:
    exact_match: bool
    max_abs_diff: float


def reference_gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain C = A @ B oracle, independent of any schedule machinery."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("reference_gemm expects 2-D matrices")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"inner dimensions disagree: A is {a.shape}, B is {b.shape}"
        )
    return a @ b


def random_int_matrix(
    rows: int, cols: int, rng: np.random.Generator, lo: int = -8, hi: int = 8
) -> np.ndarray:
    """Integer-valued float64 matrix; exact under any summation order."""
    return rng.integers(lo, hi + 1, size=(rows, cols)).astype(np.float64)


def execute_schedule(
    a: np.ndarray,
    b: np.ndarray,
    sched: Schedule,
    tile: TileShape,
    size: ProblemSize,
    *,
    order: str = "scheduled",
    rng: np.random.Generator | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Run a schedule: every work item accumulates its tile slice into C.

    Each item multiplies the A rows and B columns of its tile over the
    item's k-range [begin*blk_k, min(end*blk_k, K)) and adds the partial
    block into C, clipped to the matrix edges for ragged tiles. The
    addition is commutative by construction, so the result is identical
    for any completion order of the items.

    order may be "scheduled" (workgroup-major, deterministic) or
    "shuffled" (a random global permutation drawn from rng). With
    workers > 1 the partial products are computed concurrently and the
    additions into C are serialized by a lock.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (size.m, size.k) or b.shape != (size.k, size.n):
        raise ValueError(
            f"matrix shapes {a.shape} x {b.shape} do not match "
            f"problem size ({size.m}, {size.n}, {size.k})"
        )
    if sched.grid != grid_info(size, tile):
        raise ValueError("schedule was built for a different problem/tile")

    items = list(sched.items())
    if order == "shuffled":
        if rng is None:
            raise ValueError('order="shuffled" requires an rng')
        items = [items[i] for i in rng.permutation(len(items))]
    elif order != "scheduled":
        raise ValueError(f"unknown order {order!r}")

    m, n, k = size.m, size.n, size.k
    blk_m, blk_n, blk_k = tile.blk_m, tile.blk_n, tile.blk_k
    n_tiles = sched.grid.n_tiles
    c = np.zeros((m, n), dtype=np.float64)

    def bounds(item):
        tile_m, tile_n = divmod(item.tile_idx, n_tiles)
        r0 = tile_m * blk_m
        c0 = tile_n * blk_n
        r1 = min(r0 + blk_m, m)
        c1 = min(c0 + blk_n, n)
        k0 = item.local_iter_begin * blk_k
        k1 = min(item.local_iter_end * blk_k, k)
        return r0, r1, c0, c1, k0, k1

    if workers <= 1:
        for item in items:
            r0, r1, c0, c1, k0, k1 = bounds(item)
            c[r0:r1, c0:c1] += a[r0:r1, k0:k1] @ b[k0:k1, c0:c1]
        return c

    lock = threading.Lock()

    def run_item(item):
        r0, r1, c0, c1, k0, k1 = bounds(item)
        partial = a[r0:r1, k0:k1] @ b[k0:k1, c0:c1]
        with lock:  # atomic-equivalent combination into the shared output
            c[r0:r1, c0:c1] += partial

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_item, items))
    return c


def run_equivalence(
    size: ProblemSize,
    tile: TileShape,
    hw: HardwareModel,
    policy: Policy,
    rng_seed: int,
) -> EquivalenceReport:
    """Build, execute, and compare one instance against the reference GEMM."""
    rng = np.random.default_rng(rng_seed)
    a = random_int_matrix(size.m, size.k, rng)
    b = random_int_matrix(size.k, size.n, rng)
    sched = build_schedule(size, tile, hw, policy)
    got = execute_schedule(a, b, sched, tile, size)
    want = reference_gemm(a, b)
    diff = np.abs(got - want)
    return EquivalenceReport(
        exact_match=bool(np.array_equal(got, want)),
        max_abs_diff=float(diff.max()) if diff.size else 0.0,
    )
