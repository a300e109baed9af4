import pytest

from gemmsched import (
    AxisRange,
    CostParams,
    DEFAULT_GRID,
    GridSpec,
    HardwareModel,
    Policy,
    ProblemSize,
    SieveBank,
    TileShape,
    build_bank,
    build_report,
    canonical_policies,
    gen_problem_grid,
    measure_query_latency,
    read_records_csv,
    records_csv_text,
    tune_grid,
    winner_counts,
)

SMALL_GRID = GridSpec(AxisRange(64, 512), AxisRange(64, 256), AxisRange(32, 128))
SMALL_TILE = TileShape(64, 64, 32)
SMALL_HW = HardwareModel(cu_count=13, occupancy=1)


@pytest.fixture(scope="module")
def small_records():
    sizes = gen_problem_grid(SMALL_GRID)
    return tune_grid(sizes, SMALL_TILE, SMALL_HW)


class TestAxisRange:
    def test_values(self):
        assert AxisRange(1, 2).values() == [1, 2]
        assert AxisRange(64, 64).values() == [64]
        assert AxisRange(16, 128).values() == [16, 32, 64, 128]

    def test_rejects_non_pow2(self):
        with pytest.raises(ValueError, match="powers of two"):
            AxisRange(3, 8)
        with pytest.raises(ValueError, match="powers of two"):
            AxisRange(2, 17)

    def test_rejects_inverted(self):
        with pytest.raises(ValueError, match="exceeds"):
            AxisRange(8, 4)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError, match="step"):
            AxisRange(1, 8, "linear")


class TestGenProblemGrid:
    def test_paper_default_count(self):
        sizes = gen_problem_grid(DEFAULT_GRID)
        assert len(sizes) == 14 * 8 * 13 == 1456

    def test_single_size(self):
        spec = GridSpec(AxisRange(64, 64), AxisRange(64, 64), AxisRange(64, 64))
        assert gen_problem_grid(spec) == [ProblemSize(64, 64, 64)]

    def test_boundary_powers(self):
        spec = GridSpec(AxisRange(1, 2), AxisRange(64, 64), AxisRange(16, 16))
        assert [s.m for s in gen_problem_grid(spec)] == [1, 2]

    def test_lexicographic_order(self):
        sizes = gen_problem_grid(SMALL_GRID)
        assert sizes == sorted(sizes, key=lambda s: (s.m, s.n, s.k))
        assert len(set(sizes)) == len(sizes)


class TestTuneGrid:
    def test_one_record_per_size(self, small_records):
        sizes = gen_problem_grid(SMALL_GRID)
        assert len(small_records) == len(sizes)
        assert [r.size for r in small_records] == sizes
        for rec in small_records:
            assert len(rec.costs) == 7
            assert rec.gain >= 0.0

    def test_winner_counts_sum(self, small_records):
        counts = winner_counts(small_records)
        assert sum(counts.values()) == len(small_records)

    def test_deterministic(self, small_records):
        again = tune_grid(gen_problem_grid(SMALL_GRID), SMALL_TILE, SMALL_HW)
        assert records_csv_text(again) == records_csv_text(small_records)


class TestBuildBank:
    def test_inserts_every_winner(self, small_records):
        bank = build_bank(small_records)
        for rec in small_records:
            assert rec.winner in bank.query(rec.size)
        total = sum(f.n_inserted for _, f in bank.filters)
        assert total == len(small_records)

    def test_insertion_order_independent(self, small_records):
        forward = build_bank(small_records)
        backward = build_bank(list(reversed(small_records)))
        assert forward.to_bytes() == backward.to_bytes()

    def test_custom_capacity(self, small_records):
        bank = build_bank(small_records, capacity=500, fp_target=0.05)
        assert bank.capacity == 500


class TestRecordsCsv:
    def test_round_trip(self, small_records, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text(records_csv_text(small_records))
        rows = read_records_csv(path)
        assert len(rows) == len(small_records) * 7
        by_size = {}
        for row in rows:
            by_size.setdefault(row.size, []).append(row)
        for rec in small_records:
            got = by_size[rec.size]
            assert len(got) == 7
            winners = [r for r in got if r.is_winner]
            assert len(winners) == 1
            assert winners[0].policy == rec.winner
            spans = {r.policy: r.makespan for r in got}
            for policy, est in rec.costs:
                assert spans[policy] == est.makespan

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("m,n,k\n1,2,3\n")
        with pytest.raises(ValueError, match="line 1"):
            read_records_csv(path)

    def test_malformed_row_names_line(self, small_records, tmp_path):
        text = records_csv_text(small_records).splitlines()
        text[3] = text[3].replace(",", ";", 9)
        path = tmp_path / "bad.csv"
        path.write_text("\n".join(text))
        with pytest.raises(ValueError, match="line 4"):
            read_records_csv(path)

    def test_empty_data_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(
            ["m", "n", "k", "policy_ordinal", "sk_batches", "sk_first",
             "makespan", "utilization", "atomic_writes", "is_winner"]) + "\n")
        with pytest.raises(ValueError, match="no data"):
            read_records_csv(path)


@pytest.fixture(scope="module")
def report(small_records, tmp_path_factory):
    path = tmp_path_factory.mktemp("rep") / "records.csv"
    path.write_text(records_csv_text(small_records))
    rows = read_records_csv(path)
    return build_report(rows, [0.0, 0.05, 0.10, 0.20, 10.0])


class TestBuildReport:
    def test_winner_counts_sum_to_grid(self, report, small_records):
        assert sum(report["winner_counts"].values()) == len(small_records)

    def test_tolerance_curve_monotone(self, report):
        fractions = [pt["fraction"] for pt in report["tolerance_curve"]]
        assert fractions == sorted(fractions)
        assert all(0.0 <= f <= 1.0 for f in fractions)

    def test_huge_tolerance_reaches_one(self, report):
        assert report["tolerance_curve"][-1]["fraction"] == 1.0

    def test_gains_nonnegative_and_finite(self, report):
        for family, stats in report["gain_stats"].items():
            assert family in ("data-parallel", "stream-k-based")
            if stats["count"]:
                assert stats["mean"] >= 0.0
                assert stats["median"] >= 0.0
                assert stats["p95"] >= stats["median"]
                assert stats["max"] < float("inf")

    def test_elimination_closed_form(self, report, small_records):
        elim = report["elimination"]
        counts = winner_counts(small_records)
        nb = sum(c for label, c in counts.items() if label != "data-parallel")
        want = 1.0 - nb / (len(small_records) * 6)
        assert elim["closed_form_eliminated_fraction"] == pytest.approx(want)
        assert elim["policy_count"] == 7

    def test_missing_baseline_rejected(self, small_records, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text(records_csv_text(small_records))
        rows = [r for r in read_records_csv(path) if r.policy != Policy.data_parallel()]
        with pytest.raises(ValueError, match="baseline"):
            build_report(rows)


class TestLatency:
    def test_measure_returns_sane_numbers(self):
        bank = SieveBank.canonical()
        bank.insert(ProblemSize(64, 64, 64), Policy.data_parallel())
        stats = measure_query_latency(
            bank, [ProblemSize(64, 64, 64), ProblemSize(1, 2, 3)], repeat=2000
        )
        assert stats.queries == 2000
        assert 0 < stats.median_ns <= stats.p99_ns

    def test_rejects_bad_args(self):
        bank = SieveBank.canonical()
        with pytest.raises(ValueError):
            measure_query_latency(bank, [], repeat=10)
        with pytest.raises(ValueError):
            measure_query_latency(bank, [ProblemSize(1, 1, 1)], repeat=0)
