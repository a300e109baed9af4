"""Schedules are real programs: run one as a matrix multiplication.

Every work item multiplies its tile's A-rows against B-columns over its
k-range and adds the partial block into C. On integer-valued inputs the
additions are exact, so any completion order gives the bit-identical
result -- which is precisely what lets real kernels combine partial
tiles with atomic adds and no inter-workgroup synchronization.
"""

import numpy as np

from gemmsched import (
    HardwareModel,
    Policy,
    ProblemSize,
    TileShape,
    build_schedule,
    execute_schedule,
    random_int_matrix,
    reference_gemm,
    run_equivalence,
)

rng = np.random.default_rng(7)

# ragged on purpose: 100 is not a multiple of 64, 53 not of 16
size = ProblemSize(100, 75, 53)
tile = TileShape(64, 32, 16)
hw = HardwareModel(cu_count=6, occupancy=1)

a = random_int_matrix(size.m, size.k, rng)
b = random_int_matrix(size.k, size.n, rng)
want = reference_gemm(a, b)

for policy in (Policy.data_parallel(), Policy.hybrid(2), Policy.all_stream_k()):
    sched = build_schedule(size, tile, hw, policy)
    got = execute_schedule(a, b, sched, tile, size)
    shuffled = execute_schedule(a, b, sched, tile, size, order="shuffled", rng=rng)
    threaded = execute_schedule(a, b, sched, tile, size, workers=4)
    print(
        f"{policy.label:<14} items={sum(len(x) for x in sched.assignments):>3}  "
        f"scheduled == reference: {np.array_equal(got, want)}  "
        f"shuffled bit-identical: {shuffled.tobytes() == got.tobytes()}  "
        f"threaded bit-identical: {threaded.tobytes() == got.tobytes()}"
    )

print()
print("one-call form, fresh random matrices from a seed:")
report = run_equivalence(
    ProblemSize(256, 256, 256),
    TileShape(64, 64, 32),
    HardwareModel(104, 1),
    Policy.hybrid(2),
    rng_seed=42,
)
print(f"  exact_match={report.exact_match}  max_abs_diff={report.max_abs_diff}")
