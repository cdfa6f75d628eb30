"""Property tests over the whole pipeline (concrete runs, buckets, solver)."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dptrace import benchmarks as B
from dptrace import harness as H
from dptrace.bucketing import bucket, key_of
from dptrace.concrete import instrumented_runs

slow = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
values = st.floats(-2, 2, allow_nan=False).map(lambda v: round(v * 4) / 4)
vectors = st.lists(values, min_size=1, max_size=3).map(tuple)
fixed_shape = st.sampled_from(["rnm", "sv", "ns", "ps", "nsBuggy", "sv4"])


@st.composite
def close_pairs(draw, size=st.integers(1, 3)):
    n = draw(size)
    x1 = tuple(draw(values) for _ in range(n))
    gaps = [draw(st.sampled_from([-0.75, -0.5, 0.0, 0.5, 0.75])) for _ in range(n)]
    return x1, tuple(a + g for a, g in zip(x1, gaps))


def outcome(name, x1, x2, eps, n=40, seed=0):
    return H.expect_dp(B.get(name).build, x1, x2, eps, n, master_seed=seed).outcome


@slow
@given(st.sampled_from(["rnm", "sv", "ns", "nc", "ps", "svGap", "nsBuggy", "sv5"]), vectors,
       st.integers(0, 100))
def test_identical_inputs_cost_nothing(name, x, seed):
    # even broken mechanisms are 0-DP on a pair of equal inputs
    assert outcome(name, x, x, 0.0, seed=seed) == H.PASS


@slow
@given(fixed_shape, close_pairs(), st.floats(0, 3), st.floats(0, 2), st.integers(0, 50))
def test_acceptance_is_monotone_in_epsilon(name, pair, eps, extra, seed):
    x1, x2 = pair
    if outcome(name, x1, x2, eps, seed=seed) == H.PASS:
        assert outcome(name, x1, x2, eps + extra, seed=seed) == H.PASS


@slow
@given(fixed_shape, close_pairs(), st.floats(0, 2), st.integers(0, 50))
def test_rejection_survives_more_traces(name, pair, eps, seed):
    x1, x2 = pair
    if outcome(name, x1, x2, eps, 15, seed) == H.REJECT:
        assert outcome(name, x1, x2, eps, 60, seed) == H.REJECT


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(B.CATALOG)), st.integers(0, 10 ** 6), st.integers(1, 60))
def test_buckets_partition_the_runs(name, seed, n):
    entry = B.get(name)
    x = H.make_pair(entry, seed % 7, 7, seed).x1
    runs = instrumented_runs(entry.build(x), n, seed)
    buckets = bucket(runs)
    kept = [r for r in runs if not r.aborted]
    assert sum(len(v) for v in buckets.values()) == len(kept)
    for key, rs in buckets.items():
        assert all(key_of(r.raw_output) == key for r in rs)
    assert {id(r) for rs in buckets.values() for r in rs} == {id(r) for r in kept}


@slow
@given(fixed_shape, close_pairs(), st.integers(0, 1000))
def test_same_seed_same_verdicts(name, pair, seed):
    def strip(rec):
        rec.timings.clear()
        for b in rec.bucket_verdicts:
            b.seconds = 0.0
        return rec

    x1, x2 = pair
    build = B.get(name).build
    a = H.expect_dp(build, x1, x2, 1.0, 30, master_seed=seed)
    b = H.expect_dp(build, x1, x2, 1.0, 30, master_seed=seed)
    assert strip(a) == strip(b)
