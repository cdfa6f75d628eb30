from fractions import Fraction

import pytest

from dptrace import benchmarks as B
from dptrace import dsl as D
from dptrace import terms as T
from dptrace.bucketing import Shape, bucket, is_exact, key_of, match_bucket_to_paths
from dptrace.concrete import instrumented_run, instrumented_runs
from dptrace.errors import NoMatchingPath
from dptrace.symbolic import explore, merged_symbolic_run


def test_rnm_two_has_two_exact_buckets():
    buckets = bucket(instrumented_runs(B.rnm((0.0, 0.0)), 100, 2))
    assert set(buckets) == {0, 1}
    assert sum(len(v) for v in buckets.values()) == 100


def test_constant_program_has_one_bucket():
    assert list(bucket(instrumented_runs(D.ret(5), 10, 0))) == [5]


def test_sampled_output_keyed_by_provenance_not_value():
    prog = D.bind(D.lap(0.0, 1.0), lambda x: D.ret(x))
    runs = instrumented_runs(prog, 2, 0)
    assert runs[0].output != runs[1].output
    (key,) = bucket(runs)
    assert isinstance(key, Shape) and key.tree == ("lap", ("const",), 1.0, 0)


def test_product_of_one_draw_differs_from_product_of_two():
    same = D.bind(D.lap(0.0, 1.0), lambda a: D.ret(a * a))
    two = D.bind(D.lap(0.0, 1.0), lambda a: D.bind(D.lap(0.0, 1.0), lambda b: D.ret(a * b)))
    assert key_of(instrumented_run(same, 0).raw_output) != \
        key_of(instrumented_run(two, 0).raw_output)


def test_mixed_container_keys_elementwise():
    key = key_of(instrumented_run(B.sv_gap((-50.0, 50.0, 0.0)), 1).raw_output)
    assert key[0] is D.NOTHING
    assert isinstance(key[1], D.Just) and isinstance(key[1].value, Shape)
    assert not is_exact(key) and is_exact((True, D.NOTHING))


def test_aborted_runs_are_not_bucketed():
    e = D.bind(D.lap(0.0, 1.0), lambda x: D.if_(D.gt(x, 0.0), D.ret(1),
                                                D.seq(D.abort("neg", D.UNIT), D.ret(0))))
    runs = instrumented_runs(e, 40, 0)
    buckets = bucket(runs)
    assert list(buckets) == [1]
    assert len(buckets[1]) == sum(not r.aborted for r in runs)


class TestMatching:
    def test_rnm_key_zero(self):
        paths = explore(B.rnm((0.0, 0.0)))
        (m,) = match_bucket_to_paths(0, paths)
        assert m.path.output == T.const(0, T.INT)

    def test_constant(self):
        (m,) = match_bucket_to_paths(5, explore(D.ret(5)))
        assert m.cases == (((), ()),)

    def test_unreachable_key(self):
        with pytest.raises(NoMatchingPath):
            match_bucket_to_paths(7, explore(B.rnm((0.0, 0.0))))

    def test_sv_false_true(self):
        (m,) = match_bucket_to_paths((False, True), explore(B.sv((0.0, 0.0))))
        pc = m.path.path_condition

        def holds(t, a, b):
            return T.evaluate(pc, [Fraction(t), Fraction(a), Fraction(b)])

        assert holds(0, -1, 1)
        assert not holds(0, 1, 1) and not holds(0, -1, -1)

    def test_merged_output_splits_into_guarded_cases(self):
        (p,) = merged_symbolic_run(B.rnm((0.0, 0.0, 0.0)))
        (m,) = match_bucket_to_paths(2, [p])
        assert m.cases and all(c.guards for c in m.cases)

    def test_sampled_key_needs_same_shape(self):
        prog = B.noisy_sum((1.0,))
        key = key_of(instrumented_run(prog, 0).raw_output)
        (m,) = match_bucket_to_paths(key, explore(B.noisy_sum((2.0,))))
        assert m.cases[0].eqs[0][1] == ()
        with pytest.raises(NoMatchingPath):
            match_bucket_to_paths(key, explore(B.noisy_sum_buggy((2.0,))))

    def test_exact_key_never_matched_by_sample(self):
        with pytest.raises(NoMatchingPath):
            match_bucket_to_paths(1.5, explore(B.noisy_sum((1.0,))))
