"""Catalog of benchmark programs: correct mechanisms and broken variants.

Every builder takes the input list (a tuple of floats) and returns a closed
distribution expression.  Branches are written so that both arms return the
whole loop state, which lets the merged engine join them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import dsl as D
from .dsl import (BOOL, INT, REAL, UNIT, Lit, MapT, PairT, bind, fold_dist, fst, ge,
                  gt, if_, lap, le, list_of, lit, lt, map_laplace, pair, real, ret, snd,
                  snoc)
from .errors import EmptyInput, TooFewInputs
from .generators import COORDINATE_WISE, DATABASE, L1

# ---------------------------------------------------------------------------
# ReportNoisyMax


def rnm(xs, *, buggy: bool = False) -> D.Expr:
    """Index of the largest noised value (ties keep the earlier index)."""
    xs = list(xs)
    if not xs:
        raise EmptyInput("rnm received empty input")

    def k(noised):
        first = lit(xs[0]) if buggy else noised[0]
        init = ret(pair(lit(0), first))

        def step(st, item):
            i, x = item
            return if_(gt(x, snd(st)), ret(pair(lit(i), x)), ret(st))

        best = fold_dist(init, list(enumerate(noised))[1:], step, "st")
        return bind(best, lambda st: ret(fst(st)), "st")

    return map_laplace(xs, 1.0, k)


def rnm_buggy(xs) -> D.Expr:
    """The first element is compared without its noise."""
    return rnm(xs, buggy=True)


def rnm_gap(xs, *, width: float = 1.0) -> D.Expr:
    """Index of the noised maximum and its gap to the runner-up."""
    xs = list(xs)
    if not xs:
        raise EmptyInput("rnmGap received empty input")
    if len(xs) < 2:
        raise TooFewInputs("rnmGap received only one input")

    def k(noised):
        a, b = noised[0], noised[1]
        init = if_(gt(a, b), ret(pair(lit(0), pair(a, b))), ret(pair(lit(1), pair(b, a))))

        def step(st, item):
            i, x = item
            cm, ru = fst(snd(st)), snd(snd(st))
            return if_(gt(x, cm), ret(pair(lit(i), pair(x, cm))),
                       if_(gt(x, ru), ret(pair(fst(st), pair(cm, x))), ret(st)))

        best = fold_dist(init, list(enumerate(noised))[2:], step, "st")
        return bind(best, lambda st: ret(pair(fst(st), fst(snd(st)) - snd(snd(st)))), "st")

    return map_laplace(xs, width, k)


def rnm_gap_buggy(xs) -> D.Expr:
    """Noise of half the required width."""
    return rnm_gap(xs, width=0.5)


# ---------------------------------------------------------------------------
# SparseVector family.  State is (remaining, released) threaded through a fold.


def _sv(xs, *, thresh_width, query_width, cutoff, n, thresh, above, below):
    xs = list(xs)
    el = above(lit(0.0)).type if callable(above) else BOOL

    def k(t):
        def with_queries(noised):
            init = ret(pair(lit(n), D.nil(el)))

            def step(st, x):
                left, acc = fst(st), snd(st)
                emit = if_(gt(x, t), ret(pair(left - 1, snoc(acc, above(x - t) if callable(above)
                                                          else lit(above)))),
                           ret(pair(left, snoc(acc, below))))
                return if_(le(left, 0), ret(st), emit) if cutoff else emit

            final = fold_dist(init, noised, step, "st")
            return bind(final, lambda st: ret(snd(st)), "st")

        if query_width is None:
            return with_queries([lit(x) for x in xs])
        return map_laplace(xs, query_width, with_queries)

    return bind(lap(thresh, thresh_width), k, "t")


def sv(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """SparseVector, the correct variant: booleans, stop after n above-threshold answers."""
    return _sv(xs, thresh_width=2.0, query_width=4.0 * n, cutoff=True, n=n,
               thresh=thresh, above=True, below=lit(False))


def sv3(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """Releases the noised query value itself when above the threshold."""
    xs = list(xs)

    def k(t):
        def with_queries(noised):
            init = ret(pair(lit(n), D.nil(D.MaybeT(REAL))))

            def step(st, x):
                left, acc = fst(st), snd(st)
                emit = if_(gt(x, t), ret(pair(left - 1, snoc(acc, D.just(x)))),
                           ret(pair(left, snoc(acc, D.nothing(REAL)))))
                return if_(le(left, 0), ret(st), emit)

            final = fold_dist(init, noised, step, "st")
            return bind(final, lambda st: ret(snd(st)), "st")

        return map_laplace(xs, 2.0 * n, with_queries)

    return bind(lap(thresh, 2.0), k, "t")


def sv4(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """Query noise too small for the number of answers."""
    return _sv(xs, thresh_width=4.0, query_width=4.0 / 3.0, cutoff=True, n=n,
               thresh=thresh, above=True, below=lit(False))


def sv5(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """No query noise and no cutoff."""
    return _sv(xs, thresh_width=2.0, query_width=None, cutoff=False, n=n,
               thresh=thresh, above=True, below=lit(False))


def sv6(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """Query noise independent of n, and no cutoff."""
    return _sv(xs, thresh_width=2.0, query_width=2.0, cutoff=False, n=n,
               thresh=thresh, above=True, below=lit(False))


def sv_gap(xs, n: int = 1, thresh: float = 0.0, *, cutoff: bool = True) -> D.Expr:
    """SparseVector releasing the gap between each above answer and the threshold."""
    return _sv(xs, thresh_width=2.0, query_width=4.0 * n, cutoff=cutoff, n=n,
               thresh=thresh, above=D.just, below=D.nothing(REAL))


def sv_gap_buggy(xs, n: int = 1, thresh: float = 0.0) -> D.Expr:
    """Keeps answering after n gaps have been released."""
    return sv_gap(xs, n, thresh, cutoff=False)


# ---------------------------------------------------------------------------
# Sums


def prefix_sum(xs, *, buggy: bool = False) -> D.Expr:
    """Running sums of the noised inputs."""
    xs = list(xs)

    def k(noised):
        vals = [lit(x) for x in xs] if buggy else noised
        out, acc = [], None
        for v in vals:
            acc = v if acc is None else acc + v
            out.append(acc)
        return ret(list_of(out, REAL))

    return map_laplace(xs, 1.0, k)


def prefix_sum_buggy(xs) -> D.Expr:
    """Sums the raw inputs instead of the noised ones."""
    return prefix_sum(xs, buggy=True)


def smart_sum(xs, *, buggy: bool = False) -> D.Expr:
    """Binary-mechanism running sums over blocks of two."""
    S = PairT(REAL, PairT(REAL, PairT(INT, PairT(REAL, D.ListT(REAL)))))

    def unpack(st):
        return (fst(st), fst(snd(st)), fst(snd(snd(st))), fst(snd(snd(snd(st)))),
                snd(snd(snd(snd(st)))))

    def state(nxt, n, i, s, results):
        return pair(nxt, pair(n, pair(i, pair(s, results))))

    init = ret(state(real(0), real(0), lit(0), real(0), D.nil(REAL)))

    def step(st, x):
        nxt, n, i, s, results = unpack(st)
        s1 = s + lit(x)
        even = bind(lap(n + s1, 1.0), lambda n1: ret(
            state(n1, n1, i + 1, s1 if buggy else real(0), snoc(results, n1))), "n")
        odd = bind(lap(nxt + lit(x), 1.0), lambda nx: ret(
            state(nx, n, i + 1, s1, snoc(results, nx))), "next")
        return if_(D.eq(D.Mod(i + 1, lit(2)), lit(0)), even, odd)

    final = fold_dist(init, list(xs), step, "st")
    assert final.type == D.DistT(S)
    return bind(final, lambda st: ret(unpack(st)[4]), "st")


def smart_sum_buggy(xs) -> D.Expr:
    """Carries the block sum over instead of resetting it."""
    return smart_sum(xs, buggy=True)


def noisy_sum(xs, *, width: float = 1.0) -> D.Expr:
    total = 0.0
    for x in xs:
        total += x
    return lap(real(total), width)


def noisy_sum_buggy(xs) -> D.Expr:
    return noisy_sum(xs, width=0.5)


def noisy_count(xs, threshold: float = 0.0, *, width: float = 1.0) -> D.Expr:
    c = sum(1 for x in xs if x >= threshold)
    return lap(real(c), width)


def noisy_count_buggy(xs, threshold: float = 0.0) -> D.Expr:
    return noisy_count(xs, threshold, width=0.5)


def clipped_sum(xs, clip: float, *, buggy: bool = False) -> D.Expr:
    def step(acc, x):
        upper = acc + (lit(x) if buggy else real(clip))
        return if_(ge(lit(x), real(clip)), ret(upper),
                   if_(lt(lit(x), real(-clip)), ret(acc - real(clip)), ret(acc + lit(x))))

    return fold_dist(ret(real(0)), list(xs), step, "acc")


def noisy_mean(xs, clip: float = 1.0, *, buggy: bool = False) -> D.Expr:
    """Noised clipped sum and noised count; the division is post-processing."""
    if clip < 0:
        raise ValueError("noisy_mean received clip < 0")
    return bind(clipped_sum(xs, clip, buggy=buggy), lambda s:
                bind(lap(s, 1.0), lambda ns:
                     bind(lap(real(len(xs)), 1.0), lambda nc: ret(pair(ns, nc)), "nc"), "ns"),
                "s")


def noisy_mean_buggy(xs, clip: float = 1.0) -> D.Expr:
    """Large inputs are added unclipped."""
    return noisy_mean(xs, clip, buggy=True)


# ---------------------------------------------------------------------------
# PrivTree over the unit interval

NODE = PairT(REAL, REAL)
ENTRY = PairT(NODE, INT)
TREE = MapT(NODE, UNIT)


def count_points(points, lo, hi) -> D.Expr:
    """Number of points in [lo, hi), as a distribution-level fold."""
    return fold_dist(ret(lit(0)), list(points), lambda acc, p: if_(
        D.and_(le(lo, lit(p)), lt(lit(p), hi)), ret(acc + 1), ret(acc)), "cnt")


def split(node):
    """Halves of an interval node at its midpoint."""
    lo, hi = fst(node), snd(node)
    mid = (lo + hi) / real(2)
    return pair(lo, mid), pair(mid, hi)


def priv_tree(points, *, delta: float = 1.0, theta: float = 1.0, lam: float = 1.0,
              depth_bias: bool = True, metric: str = "tree") -> D.Expr:
    """Leaf-and-internal node map of a one-dimensional PrivTree.

    ``metric`` picks the loop measure used to stop symbolic unrolling: the
    tree built so far ("tree") or the number of current leaves ("leaves").
    """
    points = list(points)
    root = pair(pair(real(0), real(1)), lit(0))
    init = pair(list_of([root], ENTRY), D.MapEmpty(NODE, UNIT))

    def body(st):
        head = D.FromJust(D.Uncons(fst(st)))

        def on_head(h):
            entry, rest = fst(h), snd(h)
            node, depth = fst(entry), snd(entry)
            lo, hi = fst(node), snd(node)

            def on_count(c):
                biased = D.to_real(c)
                if depth_bias:
                    biased = biased - D.to_real(depth) * real(delta)
                floor = real(theta - delta)
                clamped = if_(gt(biased, floor), ret(biased), ret(floor))

                def on_noised(noised):
                    tree = D.MapInsert(node, Lit((), UNIT), snd(st))
                    left, right = split(node)
                    kids = snoc(snoc(rest, pair(left, depth + 1)), pair(right, depth + 1))
                    return if_(gt(noised, real(theta)), ret(pair(kids, tree)),
                               ret(pair(rest, tree)))

                return bind(bind(clamped, lambda b: lap(b, lam), "b"), on_noised, "noised")

            return bind(count_points(points, lo, hi), on_count, "count")

        return bind(ret(head), on_head, "h")

    if metric == "tree":
        measure = lambda st: snd(st)  # noqa: E731
    else:
        measure = lambda st: D.Length(fst(st)) + D.MapSize(snd(st))  # noqa: E731
    grown = D.loop(init, lambda st: D.not_(D.IsNil(fst(st))), body, measure, "privtree")
    return bind(grown, lambda st: ret(snd(st)), "st")


def priv_tree_buggy(points, **kw) -> D.Expr:
    """Drops the depth-dependent bias, so the tree depth is unbounded."""
    return priv_tree(points, depth_bias=False, **kw)


# ---------------------------------------------------------------------------
# Catalog


@dataclass(frozen=True)
class BenchmarkEntry:
    name: str
    build: Callable[..., D.Expr]
    relation: str
    epsilon: float
    expected: str  # "accept" or "reject"
    notes: str = ""
    sizes: tuple = (1, 6)
    values: tuple = (-10.0, 10.0)
    engine: str = "streamline"
    k: float = 1.0
    family: str = ""
    params: dict = field(default_factory=dict)


def _e(name, build, relation, eps, expected, notes, **kw) -> BenchmarkEntry:
    return BenchmarkEntry(name, build, relation, eps, expected, notes, **kw)


_SV = dict(sizes=(2, 8), values=(-2.0, 2.0), family="sv")

CATALOG: dict[str, BenchmarkEntry] = {e.name: e for e in [
    _e("rnm", rnm, COORDINATE_WISE, 2.0, "accept", "report noisy max",
       sizes=(1, 6), values=(-2.0, 2.0), family="rnm"),
    _e("rnmBuggy", rnm_buggy, COORDINATE_WISE, 2.0, "reject",
       "wrong variable: first element compared without noise",
       sizes=(2, 6), values=(-2.0, 2.0), family="rnm"),
    _e("rnmGap", rnm_gap, COORDINATE_WISE, 4.0, "accept",
       "noisy max with gap to the runner-up",
       sizes=(2, 5), values=(-2.0, 2.0), family="rnmGap"),
    _e("rnmGapBuggy", rnm_gap_buggy, COORDINATE_WISE, 4.0, "reject",
       "wrong width: noise width 0.5 instead of 1", sizes=(2, 5), values=(-2.0, 2.0),
       family="rnmGap"),
    _e("sv", sv, COORDINATE_WISE, 1.0, "accept", "sparse vector with cutoff", **_SV),
    _e("sv3", sv3, COORDINATE_WISE, 1.0, "reject",
       "releases the noised query value", **_SV),
    _e("sv4", sv4, COORDINATE_WISE, 1.0, "reject",
       "query noise width 4/3 regardless of the cutoff", **_SV),
    _e("sv5", sv5, COORDINATE_WISE, 1.0, "reject",
       "no query noise, no cutoff", engine="merged", **_SV),
    _e("sv6", sv6, COORDINATE_WISE, 1.0, "reject",
       "query noise width 2, no cutoff", engine="merged", **_SV),
    _e("svGap", sv_gap, COORDINATE_WISE, 1.0, "accept", "SparseVector releasing gaps", **_SV),
    _e("svGapBuggy", sv_gap_buggy, COORDINATE_WISE, 1.0, "reject",
       "missing cutoff: keeps releasing gaps after n answers", engine="merged", **_SV),
    _e("ps", prefix_sum, L1, 1.0, "accept", "prefix sums of noised values",
       sizes=(1, 8), family="ps"),
    _e("psBuggy", prefix_sum_buggy, L1, 1.0, "reject",
       "wrong variable: sums the raw inputs", sizes=(1, 8), family="ps"),
    _e("ss", smart_sum, L1, 1.0, "accept", "SmartSum (binary mechanism, blocks of two)",
       sizes=(1, 8), family="ss"),
    _e("ssBuggy", smart_sum_buggy, L1, 1.0, "reject",
       "off-by-one state update: block sum not reset", sizes=(1, 8), family="ss"),
    _e("pt", priv_tree, DATABASE, 2.58, "accept", "PrivTree on the unit interval",
       sizes=(1, 2), values=(0.0, 1.0), family="pt"),
    _e("ptBuggy", priv_tree_buggy, DATABASE, 2.58, "reject",
       "missing depth bias: naive noisy quadtree without depth bound",
       sizes=(1, 2), values=(0.0, 1.0 / 64), family="pt"),
    _e("nc", noisy_count, DATABASE, 1.0, "accept", "noisy count of x >= 0",
       sizes=(0, 8), family="nc"),
    _e("ncBuggy", noisy_count_buggy, DATABASE, 1.0, "reject", "wrong width: 0.5",
       sizes=(0, 8), family="nc"),
    _e("nm", noisy_mean, DATABASE, 2.0, "accept", "noisy clipped sum and count, clip 1",
       sizes=(0, 8), family="nm"),
    _e("nmBuggy", noisy_mean_buggy, DATABASE, 2.0, "reject",
       "wrong variable: upper clip adds x", sizes=(0, 8), family="nm"),
    _e("ns", noisy_sum, L1, 1.0, "accept", "noisy sum", sizes=(1, 8), family="ns"),
    _e("nsBuggy", noisy_sum_buggy, L1, 1.0, "reject", "wrong width: 0.5",
       sizes=(1, 8), family="ns"),
]}


def get(name: str) -> BenchmarkEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(CATALOG)}") from None
