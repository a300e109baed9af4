"""End to end: sweep a size grid, tune, build the sieve, report.

Equivalent to the CLI flow

    gemmsched tune --m 64:2048:pow2 --n 64:1024:pow2 --k 32:4096:pow2 \
        --cu 104 --out-sieve bank.sieve --out-records records.csv
    gemmsched query --sieve bank.sieve --size 320x64x8192
    gemmsched report --records records.csv

but driven through the library so the intermediate objects are visible.
"""

import json
import tempfile
from pathlib import Path

from gemmsched import (
    AxisRange,
    GridSpec,
    HardwareModel,
    SieveBank,
    TileShape,
    build_bank,
    build_report,
    elimination_stats,
    gen_problem_grid,
    read_records_csv,
    tune_grid,
    winner_counts,
    write_records_csv,
)

spec = GridSpec(AxisRange(64, 2048), AxisRange(64, 1024), AxisRange(32, 4096))
sizes = gen_problem_grid(spec)
print(f"grid: {len(sizes)} sizes "
      f"({len(spec.m_range.values())} x {len(spec.n_range.values())} x "
      f"{len(spec.k_range.values())} powers of two)")

tile = TileShape(128, 64, 32)
hw = HardwareModel(cu_count=104, occupancy=1)
records = tune_grid(sizes, tile, hw)
print(f"tuned with tile 128x64x32 on g={hw.cu_count}; winners: "
      f"{winner_counts(records)}")

bank = build_bank(records)
stats = elimination_stats(bank, records)
print(f"sieve-guided tuning skips {stats.eliminated_fraction:.1%} of the "
      f"non-baseline evaluations ({stats.evaluations_saved} saved, "
      f"{stats.false_negatives} false negatives)\n")

with tempfile.TemporaryDirectory() as tmp:
    sieve_path = Path(tmp) / "bank.sieve"
    records_path = Path(tmp) / "records.csv"
    bank.save(sieve_path)
    write_records_csv(records_path, records)
    print(f"artifacts: {sieve_path.stat().st_size} byte sieve, "
          f"{records_path.stat().st_size} byte records csv")

    reloaded = SieveBank.load(sieve_path)
    probe = records[len(records) // 2]
    print(f"query {probe.size.m}x{probe.size.n}x{probe.size.k} -> "
          f"{[p.label for p in reloaded.query(probe.size)]} "
          f"(tuned winner: {probe.winner.label})\n")

    rows = read_records_csv(records_path)

report = build_report(rows, [0.0, 0.05, 0.10, 0.20])
print("report:")
print(json.dumps(report, indent=2, sort_keys=True))
