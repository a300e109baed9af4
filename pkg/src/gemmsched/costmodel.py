"""Deterministic schedule cost model and per-size policy ranking.

The model charges each workgroup for its multiply-accumulate iterations
plus its output writes: a full-tile store costs c_store, a partial-tile
atomic write costs c_atomic, discounted by the overlap factor when
data-parallel work is scheduled after it in the same workgroup (the
atomic latency hides behind that later compute). Makespan is the maximum
per-workgroup cost; utilization relates useful iteration cost to the
grid's total busy-or-idle time.

The constants are run parameters, not hardware measurements: the model
ranks policies under a declared cost structure, it does not predict
milliseconds. Only cost ratios matter to the ranking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .scheduler import Phase, Schedule, WriteMode, build_schedule
from .types import GridInfo, HardwareModel, Policy, ProblemSize, TileShape


@dataclass(frozen=True, slots=True)
class CostParams:
    """Cost constants: per-iteration, per-store, per-atomic, and the
    fraction of atomic cost hidden when data-parallel work follows."""

    c_mac: float = 1.0
    c_store: float = 4.0
    c_atomic: float = 16.0
    overlap: float = 0.75

    def __post_init__(self) -> None:
        for name in ("c_mac", "c_store", "c_atomic"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must be in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "CostParams":
        known = {"c_mac", "c_store", "c_atomic", "overlap"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cost parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def from_json(cls, path: str | Path) -> "CostParams":
        """Load constants from a JSON object; absent keys keep defaults."""
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("cost parameter file must hold a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class CostEstimate:
    """Modeled cost of one schedule.

    makespan = max(per_wg_cost); utilization = useful iteration cost over
    g * makespan.
    """

    makespan: float
    utilization: float
    atomic_writes: int
    full_stores: int
    per_wg_cost: tuple[float, ...]


@dataclass(frozen=True)
class TuneRecord:
    """Per-problem-size ranking outcome over a policy list.

    costs is aligned with the evaluated policy order; gain is the
    winner's relative makespan advantage over the runner-up.
    """

    size: ProblemSize
    costs: tuple[tuple[Policy, CostEstimate], ...]
    winner: Policy
    runner_up: Policy
    gain: float


def estimate(sched: Schedule, params: CostParams) -> CostEstimate:
    """Cost a schedule workgroup by workgroup."""
    per_wg = []
    atomic_writes = 0
    full_stores = 0
    for items in sched.assignments:
        last_dp = -1
        for i, item in enumerate(items):
            if item.phase is Phase.DATA_PARALLEL:
                last_dp = i
        cost = 0.0
        for i, item in enumerate(items):
            cost += item.iterations * params.c_mac
            if item.write_mode is WriteMode.FULL_STORE:
                cost += params.c_store
                full_stores += 1
            else:
                atomic_writes += 1
                if i < last_dp:
                    cost += params.c_atomic * (1.0 - params.overlap)
                else:
                    cost += params.c_atomic
        per_wg.append(cost)

    makespan = max(per_wg) if per_wg else 0.0
    if makespan > 0:
        utilization = (sched.grid.total_iters * params.c_mac) / (
            sched.g * makespan
        )
    else:
        utilization = 1.0
    return CostEstimate(
        makespan=makespan,
        utilization=utilization,
        atomic_writes=atomic_writes,
        full_stores=full_stores,
        per_wg_cost=tuple(per_wg),
    )


def dp_utilization(grid: GridInfo, g: int) -> float:
    """Classic wave-quantization efficiency: T / (ceil(T/g) * g)."""
    if grid.total_tiles < 1:
        raise ValueError("total_tiles must be >= 1")
    if g < 1:
        raise ValueError("g must be >= 1")
    waves = -(-grid.total_tiles // g)
    return grid.total_tiles / (waves * g)


def pick_winner(
    size: ProblemSize,
    tile: TileShape,
    hw: HardwareModel,
    policies: list[Policy],
    params: CostParams,
) -> TuneRecord:
    """Estimate every policy's schedule and rank by makespan.

    Ties break toward the lower policy ordinal, so data-parallel is
    preferred when nothing separates the candidates.
    """
    if not policies:
        raise ValueError("policies must be nonempty")
    costs = tuple(
        (p, estimate(build_schedule(size, tile, hw, p), params)) for p in policies
    )
    ranked = sorted(costs, key=lambda pc: (pc[1].makespan, pc[0].sort_key()))
    winner = ranked[0][0]
    runner_up = ranked[1][0] if len(ranked) > 1 else ranked[0][0]
    w_span = ranked[0][1].makespan
    r_span = ranked[1][1].makespan if len(ranked) > 1 else w_span
    gain = (r_span - w_span) / r_span if r_span > 0 else 0.0
    return TuneRecord(size=size, costs=costs, winner=winner, runner_up=runner_up, gain=gain)
