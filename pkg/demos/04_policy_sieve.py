"""The policy sieve: Bloom filters that never forget a winner.

One filter per policy. Tuning inserts each problem size into its winning
policy's filter; at query time a size hashes against all filters and the
positives become the candidate set. False positives cost one extra
evaluation; false negatives are impossible, so the guided search never
loses the true winner. The whole bank serializes to a checksummed binary
blob and answers lookups in under a microsecond.
"""

import numpy as np

from gemmsched import (
    Policy,
    ProblemSize,
    SieveBank,
    canonical_policies,
    encode_key,
    filter_params,
    measure_query_latency,
    predicted_fp_rate,
)

m_bits, k_hashes = filter_params(10_000, 0.01)
print(f"geometry for 10,000-entry capacity at 1% FP: {m_bits} bits, {k_hashes} probes")
print(f"predicted FP at 923 inserted sizes: {predicted_fp_rate(m_bits, k_hashes, 923):.2e}\n")

bank = SieveBank.canonical()
rng = np.random.default_rng(3)
policies = canonical_policies()

# pretend 923 tuned sizes, winners skewed toward data-parallel
sizes = [
    ProblemSize(int(m), int(n), int(k))
    for m, n, k in rng.integers(1, 2**32, size=(923, 3), dtype=np.uint64)
]
winners = [policies[0] if rng.random() < 0.87 else policies[int(rng.integers(1, 7))]
           for _ in sizes]
for size, winner in zip(sizes, winners):
    bank.insert(size, winner)

hits = sum(winner in bank.query(size) for size, winner in zip(sizes, winners))
print(f"all {hits}/{len(sizes)} inserted winners query positive (no false negatives)")

strangers = [
    ProblemSize(int(m) + 2**40, int(n), int(k))
    for m, n, k in rng.integers(1, 2**32, size=(20_000, 3), dtype=np.uint64)
]
fp = sum(bool(bank.query(s)) for s in strangers)
print(f"false positives on {len(strangers)} never-seen sizes: {fp}\n")

payload = bank.to_bytes()
again = SieveBank.from_bytes(payload)
print(f"serialized bank: {len(payload)} bytes, round trip bit-identical: "
      f"{again.to_bytes() == payload}")

corrupted = bytearray(payload)
corrupted[len(payload) // 2] ^= 0x10
try:
    SieveBank.from_bytes(bytes(corrupted))
except ValueError as exc:
    print(f"one flipped byte -> {type(exc).__name__}: {exc}\n")

stats = measure_query_latency(bank, sizes[:500] + strangers[:500], repeat=200_000)
print(f"lookup latency over {stats.queries} warm queries: "
      f"median {stats.median_ns / 1000:.2f} us, p99 {stats.p99_ns / 1000:.2f} us")

probe = sizes[0]
print(f"\ncandidates for {probe.m}x{probe.n}x{probe.k}: "
      f"{[p.label for p in bank.query(probe)]}")
print(f"key bytes: {encode_key(probe).hex()}")
