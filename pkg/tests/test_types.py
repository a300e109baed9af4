import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemmsched import (
    HardwareModel,
    Policy,
    PolicyKind,
    ProblemSize,
    TileShape,
    canonical_policies,
    encode_key,
    policy_from_ordinal,
)


class TestProblemSize:
    def test_valid(self):
        s = ProblemSize(1, 2, 3)
        assert (s.m, s.n, s.k) == (1, 2, 3)

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-5, 1, 1)])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            ProblemSize(*bad)

    def test_rejects_beyond_u64(self):
        with pytest.raises(ValueError):
            ProblemSize(2**64, 1, 1)

    def test_rejects_non_int(self):
        with pytest.raises(TypeError):
            ProblemSize(1.5, 1, 1)

    def test_hashable_value_semantics(self):
        assert ProblemSize(3, 4, 5) == ProblemSize(3, 4, 5)
        assert len({ProblemSize(3, 4, 5), ProblemSize(3, 4, 5)}) == 1


class TestEncodeKey:
    def test_ones(self):
        expected = bytes([1] + [0] * 7) * 3
        assert encode_key(ProblemSize(1, 1, 1)) == expected

    def test_hand_encoded_triple(self):
        # 256 -> 00 01, 512 -> 00 02, 128 -> 80; little-endian u64 each
        expected = (
            bytes([0x00, 0x01] + [0] * 6)
            + bytes([0x00, 0x02] + [0] * 6)
            + bytes([0x80] + [0] * 7)
        )
        assert encode_key(ProblemSize(256, 512, 128)) == expected

    def test_distinct_sizes_distinct_keys(self):
        assert encode_key(ProblemSize(2, 1, 1)) != encode_key(ProblemSize(1, 2, 1))

    def test_length_always_24(self):
        assert len(encode_key(ProblemSize(2**63, 2**64 - 1, 1))) == 24

    def test_injective_over_a_million_draws(self):
        rng = np.random.default_rng(7)
        triples = rng.integers(1, 2**63, size=(10**6, 3), dtype=np.uint64)
        triples = np.unique(triples, axis=0)
        # 24-byte little-endian rows are exactly the canonical encoding
        keys = triples.astype("<u8").tobytes()
        rows = {keys[i * 24 : (i + 1) * 24] for i in range(len(triples))}
        assert len(rows) == len(triples)
        i = int(rng.integers(len(triples)))
        m, n, k = (int(v) for v in triples[i])
        assert encode_key(ProblemSize(m, n, k)) == keys[i * 24 : (i + 1) * 24]

    @given(
        st.integers(1, 2**64 - 1),
        st.integers(1, 2**64 - 1),
        st.integers(1, 2**64 - 1),
    )
    @settings(max_examples=100)
    def test_roundtrips_through_struct(self, m, n, k):
        key = encode_key(ProblemSize(m, n, k))
        assert int.from_bytes(key[0:8], "little") == m
        assert int.from_bytes(key[8:16], "little") == n
        assert int.from_bytes(key[16:24], "little") == k


class TestPolicy:
    def test_canonical_set(self):
        policies = canonical_policies()
        assert len(policies) == 7
        assert policies[0].kind is PolicyKind.DATA_PARALLEL
        assert policies[6].kind is PolicyKind.ALL_STREAM_K
        for s in range(1, 6):
            assert policies[s] == Policy.hybrid(s, sk_first=True)

    def test_ordinals(self):
        assert Policy.data_parallel().ordinal == 0
        assert Policy.all_stream_k().ordinal == 6
        assert [p.ordinal for p in canonical_policies()] == list(range(7))

    def test_stable_across_calls(self):
        assert canonical_policies() == canonical_policies()

    def test_non_canonical_members_have_no_ordinal(self):
        assert Policy.hybrid(6).ordinal is None
        assert Policy.hybrid(2, sk_first=False).ordinal is None

    def test_ordinal_roundtrip(self):
        for p in canonical_policies():
            assert policy_from_ordinal(p.ordinal) == p
        with pytest.raises(ValueError):
            policy_from_ordinal(7)

    def test_parameterless_kinds_reject_parameters(self):
        with pytest.raises(ValueError):
            Policy(PolicyKind.DATA_PARALLEL, sk_batches=1)
        with pytest.raises(ValueError):
            Policy(PolicyKind.ALL_STREAM_K, sk_first=True)

    def test_hybrid_needs_batches(self):
        with pytest.raises(ValueError):
            Policy.hybrid(0)
        assert Policy.hybrid(9).sk_batches == 9

    def test_sort_key_matches_ordinal_order(self):
        policies = canonical_policies()
        assert sorted(policies, key=Policy.sort_key) == policies

    def test_labels(self):
        assert Policy.data_parallel().label == "data-parallel"
        assert Policy.hybrid(3).label == "hybrid3"
        assert Policy.hybrid(3, sk_first=False).label == "hybrid3-dpfirst"
        assert Policy.all_stream_k().label == "all-streamk"

    def test_uses_stream_k(self):
        assert not Policy.data_parallel().uses_stream_k
        assert Policy.hybrid(1).uses_stream_k
        assert Policy.all_stream_k().uses_stream_k


class TestTileAndHardware:
    def test_tile_validation(self):
        with pytest.raises(ValueError):
            TileShape(0, 1, 1)
        with pytest.raises(TypeError):
            TileShape(16, 16, "32")

    def test_hardware_defaults(self):
        hw = HardwareModel()
        assert hw.cu_count == 104
        assert hw.occupancy == 1

    def test_hardware_validation(self):
        with pytest.raises(ValueError):
            HardwareModel(cu_count=0)
        with pytest.raises(ValueError):
            HardwareModel(occupancy=-1)
