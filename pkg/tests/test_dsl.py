import math

import pytest

from dptrace import benchmarks as B
from dptrace import dsl as D
from dptrace.dsl import BOOL, INT, REAL, DistT
from dptrace.errors import InvalidWidth, TypeMismatch


def test_literal_arithmetic_is_real():
    assert D.typecheck(D.Add(D.lit(1.0), D.lit(2.0))) == REAL


def test_if_with_int_branches():
    e = D.If(D.Lt(D.lit(1.0), D.lit(2.0)), D.Return(D.lit(0)), D.Return(D.lit(1)))
    assert D.typecheck(e) == DistT(INT)
    assert D.typecheck(e) == D.typecheck(e)


def test_ill_typed_add_is_rejected_at_build_time():
    with pytest.raises(TypeMismatch):
        D.Add(D.lit(1.0), D.lit(True))


def test_if_requires_boolean_condition():
    with pytest.raises(TypeMismatch):
        D.If(D.lit(1.0), D.ret(0), D.ret(1))


def test_bind_requires_distribution_continuation():
    with pytest.raises(TypeMismatch):
        D.bind(D.lap(0.0, 1.0), lambda x: x + 1.0)


@pytest.mark.parametrize("width", [0.0, -1.0, math.inf, math.nan])
def test_laplace_width_must_be_positive_constant(width):
    with pytest.raises(InvalidWidth):
        D.lap(0.0, width)


def test_laplace_count_for_rnm_of_three():
    assert D.count_laplace(B.rnm((1.0, 2.0, 10.0))) == 3


def test_laplace_count_without_sampling():
    assert D.count_laplace(D.ret(5)) == 0


def test_laplace_count_under_loop_is_unbounded():
    assert D.count_laplace(B.priv_tree((0.1, 0.3))) == D.UNBOUNDED


def test_every_catalog_program_typechecks():
    for e in B.CATALOG.values():
        xs = (0.1, 0.3) if e.family == "pt" else (0.5, -0.25, 1.0)
        assert isinstance(D.typecheck(e.build(xs)), DistT)


def test_container_ops():
    pairs = D.list_of([D.pair(1, 2.0)], D.PairT(INT, REAL))
    assert D.Uncons(pairs).type == D.MaybeT(D.PairT(D.PairT(INT, REAL), pairs.type))
    assert D.IsNil(D.nil(INT)).type == BOOL
    m = D.MapInsert(D.lit(1), D.lit(2.0), D.MapEmpty(INT, REAL))
    assert D.MapLookup(D.lit(1), m).type == D.MaybeT(REAL)


def test_alpha_equality_ignores_binder_names():
    a = D.bind(D.lap(0.0, 1.0), lambda x: D.ret(x), "u")
    b = D.bind(D.lap(0.0, 1.0), lambda y: D.ret(y), "v")
    assert D.alpha_equal(a, b)
    assert not D.alpha_equal(a, D.bind(D.lap(0.0, 2.0), lambda y: D.ret(y)))


def test_pretty_printer_mentions_laplace():
    assert "lap" in D.pretty(D.lap(0.0, 1.0)).lower()
