import sys
from fractions import Fraction
from pathlib import Path

import pytest

import oracles
from dptrace import benchmarks as B
from dptrace import dsl as D
from dptrace import terms as T
from dptrace.bucketing import bucket, match_bucket_to_paths
from dptrace.concrete import SampleInfo, instrumented_runs
from dptrace.coupling import (build_bucket_formula, couple_sample, emit_smtlib, replay_witness,
                              shift_var)
from dptrace.errors import WidthMismatch
from dptrace.solver import Sat, Unsat, solve
from dptrace.symbolic import explore

SHIM = [sys.executable, str(Path(__file__).with_name("cvc5_shim.py"))]


def _bind(t, s):
    if isinstance(t, T.Named):
        return T.const(Fraction(s))
    if isinstance(t, T.App):
        return T.mk(t.op, *(_bind(a, s) for a in t.args))
    return t


class TestCoupleSample:
    # |1 + s - 2| / 1 at s = 0, 1, 2.5 (oracle: direct substitution)
    @pytest.mark.parametrize("s,cost", [(0, 1), (1, 0), (Fraction(5, 2), Fraction(3, 2))])
    def test_cost_against_oracle(self, s, cost):
        c = couple_sample(SampleInfo(1.8, 1.0, 1.0), T.const(2.0), shift_var(0), 1.0)
        lo, hi = oracles.shift_interval(1, 2, 1, cost)
        assert lo <= s <= hi
        assert T.evaluate(_bind(c.cost, s), []) == cost

    def test_sample_equation(self):
        c = couple_sample(SampleInfo(1.8, 1.0, 1.0), T.const(2.0), shift_var(0), 1.0)
        assert T.evaluate(_bind(c.sample, 1), []) == Fraction(1.8) + 1

    def test_identity_costs_nothing(self):
        c = couple_sample(SampleInfo(0.3, 0.5, 2.0), T.const(0.5), shift_var(3), 2.0)
        assert T.evaluate(_bind(c.cost, 0), []) == 0

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            couple_sample(SampleInfo(0.0, 0.0, 1.0), T.const(0.0), shift_var(0), 0.5)

    def test_noisy_max_witness_cost(self):
        # shift 1 on the winner, gap-closing shifts elsewhere: total 1/2 here
        assert oracles.rnm_witness_cost([1, 2, 10], [1.5, 1.25, 10.5], 2) == Fraction(1, 2)
        total = Fraction(0)
        q1, q2 = [1, 2, 10], [1.5, 1.25, 10.5]
        for i, (a, b) in enumerate(zip(q1, q2)):
            s = 1 if i == 2 else Fraction(b) - Fraction(a)
            c = couple_sample(SampleInfo(a, a, 1.0), T.const(b), shift_var(i), 1.0)
            total += T.evaluate(_bind(c.cost, s), [])
        assert total == Fraction(1, 2) < 2


def _verdict(prog1, prog2, eps, n=5, solver=None):
    runs = instrumented_runs(prog1, n, 0)
    paths = explore(prog2)
    out = []
    for key, rs in bucket(runs).items():
        f = build_bucket_formula(key, rs, match_bucket_to_paths(key, paths), eps)
        out.append(solve(emit_smtlib(f), 30, solver))
    return out


def _release(c):
    return D.bind(D.lap(c, 1.0), lambda x: D.ret(x))


def _discard(c):
    return D.bind(D.lap(c, 1.0), lambda x: D.ret(0))


class TestSingleCall:
    # expected verdicts from the interval oracle: releasing the sample pins the
    # shift to 0, discarding it leaves the cost interval alone
    CASES = [
        (_release, 1.0, 1.0, True),
        (_release, 1.0, 0.5, False),
        (_release, 3.0, 1.0, False),
        (_discard, 1.0, 0.5, True),
        (_discard, 3.0, 1.0, True),
    ]

    @pytest.mark.parametrize("build,x2,eps,sat", CASES)
    def test_against_interval_oracle(self, build, x2, eps, sat):
        cost = oracles.shift_interval(0, x2, 1, eps)
        pinned = (Fraction(0), Fraction(0)) if build is _release else cost
        assert (oracles.intersect(cost, pinned) is not None) == sat
        verdicts = _verdict(build(0.0), build(x2), eps)
        assert all(isinstance(v, Sat if sat else Unsat) for v in verdicts)

    def test_model_inside_oracle_interval(self):
        (v,) = _verdict(_discard(0.0), _discard(3.0), 1.0)
        lo, hi = oracles.shift_interval(0, 3, 1, 1)
        assert lo <= v.model["sh0"] <= hi


class TestEmission:
    def formula(self, eps=2.0):
        runs = instrumented_runs(_release(0.0), 3, 0)
        (key, rs), = bucket(runs).items()
        return build_bucket_formula(key, rs, match_bucket_to_paths(key, explore(_release(1.0))), eps)

    def test_structure(self):
        text = emit_smtlib(self.formula())
        lines = text.splitlines()
        assert lines[0] == "(set-logic QF_LRA)"
        assert lines.count("(declare-fun sh0 () Real)") == 1
        assert not any(ln.startswith("(declare-fun sh1") for ln in lines)
        assert sum(ln.startswith("(assert") for ln in lines) >= 3
        assert lines[-1] == "(check-sat)"

    def test_budget_literal(self):
        assert "2.0)" in emit_smtlib(self.formula(2.0))
        assert "0.25)" in emit_smtlib(self.formula(0.25))

    def test_deterministic(self):
        assert emit_smtlib(self.formula()) == emit_smtlib(self.formula())

    def test_unsat_by_construction(self):
        runs = instrumented_runs(B.rnm((0.0, 0.0, 0.0)), 30, 0)
        rs = bucket(runs)[0]
        f = build_bucket_formula(0, rs, match_bucket_to_paths(0, explore(B.rnm((0.0, 0.0)))), 2)
        assert f.unsatisfiable_by_construction
        assert "(assert false)" in emit_smtlib(f)


class TestRnmBucket:
    def scripts(self, eps):
        x1, x2 = (0.0, 0.5, 0.25), (0.5, -0.25, 1.0)
        runs = instrumented_runs(B.rnm(x1), 200, 3)
        paths = explore(B.rnm(x2))
        out = []
        for key, rs in bucket(runs).items():
            f = build_bucket_formula(key, rs, match_bucket_to_paths(key, paths), eps)
            out.append((key, rs, emit_smtlib(f)))
        return out

    def test_two_solvers_agree(self):
        for eps in (2.0, 0.5):
            for _, _, script in self.scripts(eps):
                a, b = solve(script, 30), solve(script, 30, SHIM)
                assert type(a) is type(b)

    def test_sat_at_two_and_witness_replays(self):
        for key, rs, script in self.scripts(2.0):
            v = solve(script, 30)
            assert isinstance(v, Sat)
            shifts = {int(k[2:]): q for k, q in v.model.items() if k.startswith("sh")}
            rr = replay_witness(B.rnm((0.5, -0.25, 1.0)), key, rs, shifts, 2.0)
            assert rr.ok and rr.max_cost <= 2

    def test_zero_budget_rejects_distinct_inputs(self):
        assert any(isinstance(solve(s, 30), Unsat) for _, _, s in self.scripts(0.0))


def test_replay_rejects_bad_shifts():
    prog1, prog2 = B.rnm((0.0, 0.0)), B.rnm((0.0, 0.0))
    runs = instrumented_runs(prog1, 20, 0)
    rs = bucket(runs)[0]
    assert replay_witness(prog2, 0, rs, {}, 0).ok
    assert not replay_witness(prog2, 0, rs, {0: Fraction(-100)}, 1000).ok
    over = replay_witness(prog2, 0, rs, {0: Fraction(3)}, 2)
    assert not over.ok and over.max_cost == 3
