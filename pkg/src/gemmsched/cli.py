"""Command-line surface: tune, query, verify, report.

    gemmsched tune --out-sieve sieve.bin --out-records records.csv
    gemmsched query --sieve sieve.bin --size 1024x1024x4096
    gemmsched verify --seed 42 --cases 200
    gemmsched report --records records.csv --tolerances 0,5,10,20

Range flags follow lo:hi:pow2 (e.g. --m 1:8192:pow2), tiles and sizes
are AxBxC triples. Tuning winners come from the cost model so repeated
runs are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .costmodel import CostParams
from .executor import run_equivalence
from .pipeline import (
    DEFAULT_GRID,
    DEFAULT_TILE,
    DEFAULT_TOLERANCES,
    AxisRange,
    GridSpec,
    build_bank,
    build_report,
    gen_problem_grid,
    measure_query_latency,
    read_records_csv,
    records_csv_text,
    tune_grid,
    winner_counts,
)
from .scheduler import build_schedule, validate_schedule
from .sieve import SieveBank, SieveFormatError, elimination_stats
from .types import HardwareModel, ProblemSize, TileShape, canonical_policies

_VERIFY_TILES = [
    TileShape(16, 16, 16),
    TileShape(32, 32, 32),
    TileShape(64, 64, 32),
    TileShape(128, 64, 32),
]


def parse_range(text: str) -> AxisRange:
    parts = text.split(":")
    if len(parts) == 2:
        parts.append("pow2")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:pow2, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        return AxisRange(lo, hi, parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_triple(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected AxBxC, got {text!r}")
    try:
        a, b, c = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from None
    return a, b, c


def parse_tile(text: str) -> TileShape:
    try:
        return TileShape(*_parse_triple(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_size(text: str) -> ProblemSize:
    try:
        return ProblemSize(*_parse_triple(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_tolerances(text: str) -> list[float]:
    try:
        values = [float(p) / 100.0 for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected percentages like 0,5,10,20: {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("tolerances must be nonnegative percentages")
    return values


def _write_atomic(path: str, payload: bytes) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_tune(args: argparse.Namespace) -> int:
    spec = GridSpec(args.m, args.n, args.k)
    hw = HardwareModel(cu_count=args.cu, occupancy=args.occupancy)
    try:
        params = (
            CostParams.from_json(args.cost_params) if args.cost_params else CostParams()
        )
    except (OSError, ValueError) as exc:
        print(f"error: cannot load cost parameters: {exc}", file=sys.stderr)
        return 1

    sizes = gen_problem_grid(spec)
    records = tune_grid(sizes, args.tile, hw, params)
    bank = build_bank(records, capacity=args.capacity, fp_target=args.fp_target)
    sieve_payload = bank.to_bytes()

    try:
        # Render both artifacts first, then write atomically so a failed
        # run leaves no partial files behind.
        _write_atomic(args.out_sieve, sieve_payload)
        _write_atomic(args.out_records, records_csv_text(records).encode())
    except OSError as exc:
        print(f"error: writing outputs failed: {exc}", file=sys.stderr)
        return 1

    stats = elimination_stats(bank, records)
    print(f"tuned {len(sizes)} sizes, tile {args.tile.blk_m}x{args.tile.blk_n}x"
          f"{args.tile.blk_k}, g={hw.cu_count * hw.occupancy}")
    print("winner counts:")
    counts = winner_counts(records)
    for policy in canonical_policies():
        print(f"  {policy.label:<16} {counts.get(policy.label, 0)}")
    print(
        f"elimination: {stats.eliminated_fraction:.4f} of non-baseline "
        f"evaluations skipped, {stats.false_negatives} false negatives, "
        f"{stats.evaluations_saved} evaluations saved"
    )
    print(f"wrote {args.out_sieve} ({len(sieve_payload)} bytes) and {args.out_records}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    try:
        bank = SieveBank.load(args.sieve)
    except OSError as exc:
        print(f"error: cannot read sieve file: {exc}", file=sys.stderr)
        return 1
    except SieveFormatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    candidates = bank.query(args.size)
    size = args.size
    if candidates:
        labels = ", ".join(p.label for p in candidates)
    else:
        labels = "(none)"
    print(f"candidates for {size.m}x{size.n}x{size.k}: {labels}")

    stats = measure_query_latency(bank, [size], repeat=args.repeat)
    print(
        f"latency over {stats.queries} warm queries: "
        f"median {stats.median_ns / 1000:.3f} us, p99 {stats.p99_ns / 1000:.3f} us"
    )
    return 0


def _verify_instances(rng: np.random.Generator, count: int):
    policies = canonical_policies()
    for i in range(count):
        policy = policies[i % len(policies)]
        m, n, k = (int(2 ** rng.uniform(0, 9)) for _ in range(3))
        tile = _VERIFY_TILES[rng.integers(len(_VERIFY_TILES))]
        hw = HardwareModel(cu_count=int(rng.integers(1, 105)), occupancy=1)
        yield ProblemSize(m, n, k), tile, hw, policy


def cmd_verify(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    passes: dict[str, int] = {}
    failures = 0
    for idx, (size, tile, hw, policy) in enumerate(_verify_instances(rng, args.cases)):
        sched = build_schedule(size, tile, hw, policy)
        if args.inject_fault and idx == 0:
            broken = [list(items) for items in sched.assignments]
            victim = next(i for i, items in enumerate(broken) if items)
            del broken[victim][0]
            sched = dataclasses.replace(
                sched, assignments=tuple(tuple(items) for items in broken)
            )
        coverage = validate_schedule(sched)
        equiv = run_equivalence(size, tile, hw, policy, rng_seed=int(rng.integers(2**31)))
        ok = coverage.covered_once and equiv.exact_match
        if ok:
            passes[policy.label] = passes.get(policy.label, 0) + 1
        else:
            failures += 1
            print(
                f"FAIL {size.m}x{size.n}x{size.k} tile "
                f"{tile.blk_m}x{tile.blk_n}x{tile.blk_k} g={hw.cu_count} "
                f"{policy.label}: duplicates={coverage.duplicates} "
                f"gaps={coverage.gaps} max_abs_diff={equiv.max_abs_diff}"
            )
    print(f"verified {args.cases} instances, {failures} failure(s)")
    for policy in canonical_policies():
        if policy.label in passes:
            print(f"  {policy.label:<16} {passes[policy.label]} pass")
    return 0 if failures == 0 else 1


def cmd_report(args: argparse.Namespace) -> int:
    try:
        rows = read_records_csv(args.records)
    except OSError as exc:
        print(f"error: cannot read records: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = build_report(rows, args.tolerances)
    payload = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        try:
            _write_atomic(args.out, payload.encode() + b"\n")
        except OSError as exc:
            print(f"error: writing report failed: {exc}", file=sys.stderr)
            return 1
    else:
        print(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gemmsched",
        description="GEMM schedule tuning and filter-bank policy selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tune = sub.add_parser("tune", help="sweep a size grid, emit sieve + records")
    tune.add_argument("--m", type=parse_range, default=DEFAULT_GRID.m_range,
                      help="M range lo:hi:pow2 (default 1:8192:pow2)")
    tune.add_argument("--n", type=parse_range, default=DEFAULT_GRID.n_range,
                      help="N range lo:hi:pow2 (default 64:8192:pow2)")
    tune.add_argument("--k", type=parse_range, default=DEFAULT_GRID.k_range,
                      help="K range lo:hi:pow2 (default 16:65536:pow2)")
    tune.add_argument("--tile", type=parse_tile, default=DEFAULT_TILE,
                      help="tile shape BLKMxBLKNxBLKK (default 256x128x32)")
    tune.add_argument("--cu", type=int, default=104, help="compute units (default 104)")
    tune.add_argument("--occupancy", type=int, default=1,
                      help="workgroups per CU (default 1)")
    tune.add_argument("--cost-params", default=None,
                      help="JSON file with c_mac/c_store/c_atomic/overlap")
    tune.add_argument("--capacity", type=int, default=None,
                      help="filter design load (default 10000)")
    tune.add_argument("--fp-target", type=float, default=None,
                      help="filter false-positive target (default 0.01)")
    tune.add_argument("--out-sieve", required=True, help="output sieve path")
    tune.add_argument("--out-records", required=True, help="output records CSV path")
    tune.set_defaults(func=cmd_tune)

    query = sub.add_parser("query", help="look up candidate policies for one size")
    query.add_argument("--sieve", required=True, help="sieve file from tune")
    query.add_argument("--size", type=parse_size, required=True, help="MxNxK")
    query.add_argument("--repeat", type=int, default=100_000,
                       help="lookups for the latency measurement")
    query.set_defaults(func=cmd_query)

    verify = sub.add_parser("verify", help="randomized coverage and oracle checks")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--cases", type=int, default=200)
    verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    verify.set_defaults(func=cmd_verify)

    report = sub.add_parser("report", help="summarize a records CSV as JSON")
    report.add_argument("--records", required=True)
    report.add_argument("--tolerances", type=parse_tolerances,
                        default=DEFAULT_TOLERANCES,
                        help="comma-separated slow-down percentages (default 0,5,10,20)")
    report.add_argument("--out", default=None, help="write JSON here instead of stdout")
    report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
