"""Work-centric GEMM scheduling: construction, verification, ranking, selection.

The library models the persistent-kernel GEMM scheduling family that
splits work either by output tile (data-parallel), by flat k-iteration
(all-Stream-K), or by a hybrid of trailing Stream-K batches plus leading
data-parallel waves. It can

* build the exact per-workgroup work assignment for any policy and audit
  its exactly-once coverage (`scheduler`),
* execute any schedule as a real matrix product and compare it bitwise
  against a reference GEMM (`executor`),
* rank policies per problem size with a deterministic cost model
  (`costmodel`),
* remember winners in a bank of per-policy Bloom filters with zero false
  negatives, a bit-exact file format, and microsecond lookups (`sieve`),
* and run the whole sweep/report pipeline (`pipeline`, `cli`).
"""

from .types import (
    GridInfo,
    HardwareModel,
    KEY_BYTES,
    Policy,
    PolicyKind,
    ProblemSize,
    TileShape,
    canonical_policies,
    encode_key,
    policy_from_ordinal,
)
from .scheduler import (
    CoverageReport,
    IterLocation,
    Phase,
    Schedule,
    WorkItem,
    WriteMode,
    build_schedule,
    grid_info,
    grid_size,
    hybrid_sk_tiles,
    locate_iter,
    streamk_ranges,
    validate_schedule,
)
from .executor import (
    EquivalenceReport,
    execute_schedule,
    random_int_matrix,
    reference_gemm,
    run_equivalence,
)
from .costmodel import (
    CostEstimate,
    CostParams,
    TuneRecord,
    dp_utilization,
    estimate,
    pick_winner,
)
from .sieve import (
    BadMagicError,
    BloomFilter,
    ChecksumError,
    EliminationStats,
    SieveBank,
    SieveFormatError,
    TruncatedError,
    UnsupportedVersionError,
    elimination_stats,
    filter_params,
    filter_seed,
    hash_probes,
    predicted_fp_rate,
)
from .pipeline import (
    AxisRange,
    GridSpec,
    DEFAULT_GRID,
    DEFAULT_HW,
    DEFAULT_TILE,
    LatencyStats,
    RecordRow,
    build_bank,
    build_report,
    gen_problem_grid,
    measure_query_latency,
    read_records_csv,
    records_csv_text,
    tune_grid,
    winner_counts,
    write_records_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AxisRange",
    "BadMagicError",
    "BloomFilter",
    "ChecksumError",
    "CostEstimate",
    "CostParams",
    "CoverageReport",
    "DEFAULT_GRID",
    "DEFAULT_HW",
    "DEFAULT_TILE",
    "EliminationStats",
    "EquivalenceReport",
    "GridInfo",
    "GridSpec",
    "HardwareModel",
    "IterLocation",
    "KEY_BYTES",
    "LatencyStats",
    "Phase",
    "Policy",
    "PolicyKind",
    "ProblemSize",
    "RecordRow",
    "Schedule",
    "SieveBank",
    "SieveFormatError",
    "TileShape",
    "TruncatedError",
    "TuneRecord",
    "UnsupportedVersionError",
    "WorkItem",
    "WriteMode",
    "build_bank",
    "build_report",
    "build_schedule",
    "canonical_policies",
    "dp_utilization",
    "elimination_stats",
    "encode_key",
    "estimate",
    "execute_schedule",
    "filter_params",
    "filter_seed",
    "gen_problem_grid",
    "grid_info",
    "grid_size",
    "hash_probes",
    "hybrid_sk_tiles",
    "locate_iter",
    "measure_query_latency",
    "pick_winner",
    "policy_from_ordinal",
    "predicted_fp_rate",
    "random_int_matrix",
    "read_records_csv",
    "records_csv_text",
    "reference_gemm",
    "run_equivalence",
    "streamk_ranges",
    "tune_grid",
    "validate_schedule",
    "winner_counts",
    "write_records_csv",
]
