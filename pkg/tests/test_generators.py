import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from dptrace.generators import (COORDINATE_WISE, DATABASE, L1, PATTERNS, SimilarPair,
                                gen_coordinate_wise, gen_database, gen_l1, multiset_distance,
                                size_ramp, verify)

seeds = st.integers(0, 2 ** 32)


@given(st.integers(1, 12), seeds, st.sampled_from(PATTERNS + (None,)))
def test_coordinate_wise_pairs_verify(n, seed, pattern):
    p = gen_coordinate_wise(n, 1.0, seed, pattern=pattern)
    assert verify(p) and len(p.x1) == len(p.x2) == n
    assert all(abs(a - b) < 1.0 for a, b in zip(p.x1, p.x2))


@given(st.integers(1, 12), seeds, st.floats(0.0, 3.0))
def test_l1_pairs_verify(n, seed, k):
    p = gen_l1(n, k, seed)
    assert verify(p)
    assert sum(abs(a - b) for a, b in zip(p.x1, p.x2)) <= k + 1e-12


@given(st.integers(0, 10), seeds, st.integers(0, 3))
def test_database_pairs_verify(n, seed, k):
    p = gen_database(n, k, seed)
    assert verify(p)
    assert multiset_distance(p.x1, p.x2) == oracles.multiset_distance(p.x1, p.x2) <= k


def test_len3_verifies():
    assert verify(gen_coordinate_wise(3, 1.0, 42))


def test_zero_bound_gives_equal_vectors():
    p = gen_coordinate_wise(5, 0.0, 3)
    assert p.x1 == p.x2


def test_zero_edits_gives_equal_multisets():
    p = gen_database(6, 0, 3)
    assert sorted(p.x1) == sorted(p.x2)


def test_one_edit():
    for s in range(50):
        p = gen_database(4, 1, s)
        assert multiset_distance(p.x1, p.x2) == 1


def test_gap_signs_are_both_represented():
    gaps = []
    for s in range(2000):
        p = gen_coordinate_wise(5, 1.0, s)
        gaps += [b - a for a, b in zip(p.x1, p.x2)]
    gaps = np.array(gaps)
    assert len(gaps) == 10 ** 4
    assert 0.4 < (gaps > 0).mean() < 0.6


def test_l1_signs_are_both_represented():
    gaps = []
    for s in range(1000):
        p = gen_l1(10, 1.0, s)
        gaps += [b - a for a, b in zip(p.x1, p.x2) if b != a]
    assert 0.4 < np.mean(np.array(gaps) > 0) < 0.6


def test_database_verifier_agrees_with_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(10 ** 4):
        a = list(rng.integers(0, 4, size=rng.integers(0, 5)))
        b = list(rng.integers(0, 4, size=rng.integers(0, 5)))
        assert multiset_distance(a, b) == oracles.multiset_distance(a, b)


def test_verifiers_reject_bad_pairs():
    assert not verify(SimilarPair((0.0,), (1.0,), COORDINATE_WISE, 1.0))
    assert not verify(SimilarPair((0.0, 0.0), (0.75, 0.5), L1, 1.0))
    assert verify(SimilarPair((0.0,), (0.0,), L1, 1.0))
    assert not verify(SimilarPair((1.0, 2.0), (3.0,), DATABASE, 1))


def test_same_seed_same_pair():
    assert gen_coordinate_wise(4, 1.0, (7, 0, 3)) == gen_coordinate_wise(4, 1.0, (7, 0, 3))
    assert gen_l1(4, 1.0, 5) == gen_l1(4, 1.0, 5)


def test_range_is_respected():
    p = gen_coordinate_wise(50, 1.0, 1, lo=0.0, hi=0.5)
    assert all(0.0 <= x <= 0.5 for x in p.x1)


@pytest.mark.parametrize("i,n,lo,hi,size", [(0, 10, 2, 8, 2), (9, 10, 2, 8, 8), (5, 11, 1, 3, 2),
                                            (0, 1, 4, 9, 4)])
def test_size_ramp(i, n, lo, hi, size):
    assert size_ramp(i, n, lo, hi) == size


@settings(max_examples=50)
@given(st.integers(2, 200), st.integers(0, 20), st.integers(0, 20))
def test_size_ramp_is_monotone(n, lo, extra):
    sizes = [size_ramp(i, n, lo, lo + extra) for i in range(n)]
    assert sizes == sorted(sizes) and sizes[0] == lo and sizes[-1] == lo + extra
