"""How the seven scheduling policies carve up one GEMM.

A 256x512x128 problem under 64x64x32 tiles gives a 4x8 grid of output
tiles, four k-iterations each. We assign it to five workgroups under
each policy and draw who gets what.
"""

from gemmsched import (
    HardwareModel,
    Phase,
    ProblemSize,
    TileShape,
    build_schedule,
    canonical_policies,
    grid_info,
    validate_schedule,
)

size = ProblemSize(256, 512, 128)
tile = TileShape(64, 64, 32)
hw = HardwareModel(cu_count=5, occupancy=1)

grid = grid_info(size, tile)
print(f"problem {size.m}x{size.n}x{size.k}, tile {tile.blk_m}x{tile.blk_n}x{tile.blk_k}")
print(
    f"-> {grid.m_tiles}x{grid.n_tiles} = {grid.total_tiles} tiles, "
    f"{grid.iters_per_tile} k-iterations each, {grid.total_iters} total iterations"
)
print(f"-> {hw.cu_count} CUs x occupancy {hw.occupancy} = 5 workgroups\n")

for policy in canonical_policies():
    sched = build_schedule(size, tile, hw, policy)
    report = validate_schedule(sched)
    assert report.covered_once

    print(f"--- {policy.label} ---")
    for wg, items in enumerate(sched.assignments):
        parts = []
        for it in items:
            span = f"[{it.local_iter_begin}:{it.local_iter_end})"
            mark = "*" if it.phase is Phase.STREAM_K else " "
            whole = span == f"[0:{grid.iters_per_tile})"
            parts.append(f"t{it.tile_idx}{'' if whole else span}{mark}".strip())
        print(f"  wg{wg}: {' '.join(parts) if parts else '(idle)'}")
    sk_iters = sum(
        it.iterations for it in sched.items() if it.phase is Phase.STREAM_K
    )
    print(f"  stream-k share: {sk_iters}/{grid.total_iters} iterations")
    print()

print("legend: tN = whole tile N, tN[a:b) = k-slice of tile N, * = stream-k phase")
print("every (tile, k-iteration) pair appears exactly once per policy")
