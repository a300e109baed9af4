"""End-to-end tuning pipeline: size grids, sweeps, records, and reports.

A tuning run walks a power-of-two problem-size grid, ranks the canonical
policies per size with the cost model, inserts each winner into its
policy's filter, and leaves two artifacts: the serialized filter bank
and a per-(size, policy) records CSV. Reports are computed back from the
CSV so they stay decoupled from the sweep.

Everything here is deterministic: identical inputs produce byte-identical
artifacts.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .costmodel import CostParams, TuneRecord, pick_winner
from .sieve import SieveBank, elimination_stats
from .types import (
    HardwareModel,
    Policy,
    ProblemSize,
    TileShape,
    canonical_policies,
    policy_from_ordinal,
)

RECORD_COLUMNS = [
    "m",
    "n",
    "k",
    "policy_ordinal",
    "sk_batches",
    "sk_first",
    "makespan",
    "utilization",
    "atomic_writes",
    "is_winner",
]

DEFAULT_TILE = TileShape(256, 128, 32)
DEFAULT_HW = HardwareModel(cu_count=104, occupancy=1)
DEFAULT_TOLERANCES = [0.0, 0.05, 0.10, 0.20]


def _is_pow2(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


@dataclass(frozen=True, slots=True)
class AxisRange:
    """Inclusive [lo, hi] power-of-two sweep along one dimension."""

    lo: int
    hi: int
    step: str = "pow2"

    def __post_init__(self) -> None:
        if self.step != "pow2":
            raise ValueError(f"unsupported step {self.step!r}; only pow2")
        if not (_is_pow2(self.lo) and _is_pow2(self.hi)):
            raise ValueError(f"bounds must be powers of two, got {self.lo}:{self.hi}")
        if self.lo > self.hi:
            raise ValueError(f"lo {self.lo} exceeds hi {self.hi}")

    def values(self) -> list[int]:
        out = []
        v = self.lo
        while v <= self.hi:
            out.append(v)
            v *= 2
        return out


@dataclass(frozen=True, slots=True)
class GridSpec:
    m_range: AxisRange
    n_range: AxisRange
    k_range: AxisRange


DEFAULT_GRID = GridSpec(AxisRange(1, 8192), AxisRange(64, 8192), AxisRange(16, 65536))


def gen_problem_grid(spec: GridSpec) -> list[ProblemSize]:
    """Full cross product in lexicographic (m, n, k) order, deduplicated."""
    seen = dict.fromkeys(
        ProblemSize(m, n, k)
        for m in spec.m_range.values()
        for n in spec.n_range.values()
        for k in spec.k_range.values()
    )
    return list(seen)


def tune_grid(
    sizes: list[ProblemSize],
    tile: TileShape = DEFAULT_TILE,
    hw: HardwareModel = DEFAULT_HW,
    params: CostParams | None = None,
    policies: list[Policy] | None = None,
) -> list[TuneRecord]:
    """Rank every policy on every size; one record per size, input order."""
    if params is None:
        params = CostParams()
    if policies is None:
        policies = canonical_policies()
    return [pick_winner(size, tile, hw, policies, params) for size in sizes]


def build_bank(
    records: list[TuneRecord],
    capacity: int | None = None,
    fp_target: float | None = None,
    policies: list[Policy] | None = None,
) -> SieveBank:
    """Insert each record's winner into a fresh bank.

    Insertion happens in lexicographic size order so the resulting bit
    arrays do not depend on sweep order.
    """
    kwargs = {}
    if capacity is not None:
        kwargs["capacity"] = capacity
    if fp_target is not None:
        kwargs["fp_target"] = fp_target
    bank = SieveBank(policies, **kwargs)
    for rec in sorted(records, key=lambda r: (r.size.m, r.size.n, r.size.k)):
        bank.insert(rec.size, rec.winner)
    return bank


def winner_counts(records: list[TuneRecord]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec.winner.label] = counts.get(rec.winner.label, 0) + 1
    return counts


# -- records CSV ----------------------------------------------------------


def records_csv_text(records: list[TuneRecord]) -> str:
    """Render records as CSV, one row per (size, policy).

    Floats are written in shortest round-trip form so output is
    deterministic and re-parses exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(RECORD_COLUMNS)
    for rec in records:
        for policy, est in rec.costs:
            if policy.ordinal is None:
                raise ValueError(
                    f"policy {policy} has no canonical ordinal; "
                    "records CSV covers the canonical family"
                )
            writer.writerow(
                [
                    rec.size.m,
                    rec.size.n,
                    rec.size.k,
                    policy.ordinal,
                    policy.sk_batches,
                    int(policy.sk_first),
                    repr(est.makespan),
                    repr(est.utilization),
                    est.atomic_writes,
                    int(policy == rec.winner),
                ]
            )
    return out.getvalue()


def write_records_csv(path, records: list[TuneRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(records_csv_text(records))


@dataclass(frozen=True, slots=True)
class RecordRow:
    size: ProblemSize
    policy: Policy
    makespan: float
    utilization: float
    atomic_writes: int
    is_winner: bool


def read_records_csv(path) -> list[RecordRow]:
    """Parse a records CSV, reporting the offending line on bad input."""
    rows: list[RecordRow] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_COLUMNS:
            raise ValueError(f"line 1: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                m, n, k, ordinal = (int(row[i]) for i in range(4))
                sk_batches, sk_first = int(row[4]), int(row[5])
                makespan, utilization = float(row[6]), float(row[7])
                atomic_writes, is_winner = int(row[8]), int(row[9])
                policy = policy_from_ordinal(ordinal)
                if (policy.sk_batches, int(policy.sk_first)) != (sk_batches, sk_first):
                    raise ValueError("policy fields disagree with ordinal")
                rows.append(
                    RecordRow(
                        ProblemSize(m, n, k),
                        policy,
                        makespan,
                        utilization,
                        atomic_writes,
                        bool(is_winner),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise ValueError(f"line {lineno}: malformed record row ({exc})") from None
    if not rows:
        raise ValueError("records CSV holds no data rows")
    return rows


# -- report ---------------------------------------------------------------


def _gain_summary(gains: list[float]) -> dict:
    if not gains:
        return {"count": 0, "mean": None, "median": None, "p95": None, "max": None}
    return {
        "count": len(gains),
        "mean": statistics.fmean(gains),
        "median": statistics.median(gains),
        "p95": float(np.percentile(gains, 95)),
        "max": max(gains),
    }


def build_report(rows: list[RecordRow], tolerances: list[float] | None = None) -> dict:
    """Winner counts, tolerance curve, and gain distribution from records.

    The tolerance curve gives, per tolerance t, the fraction of sizes
    whose best Stream-K-based policy is within (1+t) of the data-parallel
    makespan. Gains compare each size's winner against its runner-up,
    grouped by winner family.
    """
    if tolerances is None:
        tolerances = DEFAULT_TOLERANCES
    per_size: dict[ProblemSize, list[RecordRow]] = {}
    for row in rows:
        per_size.setdefault(row.size, []).append(row)

    counts: dict[str, int] = {}
    sk_within: dict[float, int] = {t: 0 for t in tolerances}
    gains = {"data-parallel": [], "stream-k-based": []}

    for size, group in per_size.items():
        ranked = sorted(group, key=lambda r: (r.makespan, r.policy.sort_key()))
        winner = ranked[0]
        counts[winner.policy.label] = counts.get(winner.policy.label, 0) + 1
        if len(ranked) > 1 and ranked[1].makespan > 0:
            gain = (ranked[1].makespan - winner.makespan) / ranked[1].makespan
        else:
            gain = 0.0
        family = (
            "stream-k-based" if winner.policy.uses_stream_k else "data-parallel"
        )
        gains[family].append(gain)

        dp_rows = [r for r in group if not r.policy.uses_stream_k]
        sk_rows = [r for r in group if r.policy.uses_stream_k]
        if not dp_rows:
            raise ValueError(f"size {size} lacks a data-parallel baseline row")
        dp_span = min(r.makespan for r in dp_rows)
        if sk_rows:
            best_sk = min(r.makespan for r in sk_rows)
            for t in tolerances:
                if best_sk <= (1.0 + t) * dp_span:
                    sk_within[t] += 1

    n_sizes = len(per_size)
    policy_count = len({r.policy for r in rows})
    non_baseline_winners = sum(
        c for label, c in counts.items() if label != "data-parallel"
    )
    nb_fraction = non_baseline_winners / n_sizes if n_sizes else 0.0
    closed_form = (
        1.0 - nb_fraction / (policy_count - 1) if policy_count > 1 else 1.0
    )

    return {
        "sizes": n_sizes,
        "winner_counts": counts,
        "tolerance_curve": [
            {"tolerance": t, "fraction": sk_within[t] / n_sizes} for t in tolerances
        ],
        "gain_stats": {family: _gain_summary(g) for family, g in gains.items()},
        "elimination": {
            "baseline": "data-parallel",
            "policy_count": policy_count,
            "non_baseline_winner_fraction": nb_fraction,
            "closed_form_eliminated_fraction": closed_form,
        },
    }


# -- query latency --------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LatencyStats:
    queries: int
    median_ns: float
    p99_ns: float


def measure_query_latency(
    bank: SieveBank,
    sizes: list[ProblemSize],
    repeat: int,
    warmup: int = 1000,
) -> LatencyStats:
    """Per-lookup wall-clock latency over `repeat` single-threaded queries.

    Cycles through the given sizes with a warm cache; each lookup is
    timed individually, so the figures include the fixed timer overhead
    of a couple hundred nanoseconds.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    if not sizes:
        raise ValueError("sizes must be nonempty")
    pool = sizes * (-(-max(warmup, repeat) // len(sizes)))
    query = bank.query
    clock = time.perf_counter_ns
    for size in pool[:warmup]:
        query(size)
    samples = np.empty(repeat, dtype=np.int64)
    for i in range(repeat):
        size = pool[i]
        t0 = clock()
        query(size)
        t1 = clock()
        samples[i] = t1 - t0
    return LatencyStats(
        queries=repeat,
        median_ns=float(np.median(samples)),
        p99_ns=float(np.percentile(samples, 99)),
    )
