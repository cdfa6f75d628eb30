"""Symbolic execution over Laplace samples.

Two engines share one pure evaluator:

* the path engine (``explore``/``streamline``) enumerates control-flow paths,
  producing one ``PathResult`` per path;
* the merged engine (``merged_symbolic_run``) joins the two sides of every
  symbolic ``If`` into a single state using ``ite`` terms where the value
  skeletons agree and a guarded ``Union`` where they do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, NamedTuple

from . import dsl as D
from . import terms as T
from .dsl import NOTHING, Just, MapV, PairV
from .errors import BudgetExceeded, EvalError, MetricNotMonotone
from .terms import App, Const, SVar, mk

DEFAULT_IF_BUDGET = 2 ** 16
DEFAULT_MAX_UNROLL = 1000


# ---------------------------------------------------------------------------
# Symbolic values


@dataclass(frozen=True)
class Union:
    """Guarded alternatives with structurally different shapes."""

    alts: tuple  # ((guard, value), ...), guards mutually exclusive

    def __str__(self):
        return "{" + " | ".join(f"{g} -> {v}" for g, v in self.alts) + "}"


class _Poison:
    """Result of an operation that is undefined on an infeasible alternative."""

    def __repr__(self):
        return "POISON"


POISON = _Poison()


def lift(v, ty: D.Type | None = None):
    """Turn a concrete value into a symbolic one."""
    if isinstance(v, bool):
        return Const(v, T.BOOL)
    if isinstance(v, int) and ty != D.REAL:
        return Const(v, T.INT)
    if isinstance(v, (int, float, Fraction)):
        return T.const(v, T.REAL)
    if isinstance(v, tuple):
        el = ty.elem if isinstance(ty, D.ListT) else None
        return tuple(lift(x, el) for x in v)
    if isinstance(v, PairV):
        a, b = (ty.fst, ty.snd) if isinstance(ty, D.PairT) else (None, None)
        return PairV(lift(v.fst, a), lift(v.snd, b))
    if isinstance(v, Just):
        return Just(lift(v.value, ty.elem if isinstance(ty, D.MaybeT) else None))
    if isinstance(v, MapV):
        vt = ty.val if isinstance(ty, D.MapT) else None
        return MapV(tuple((_exact_key(k), lift(x, vt)) for k, x in v.items))
    return v


def _exact_key(k):
    if isinstance(k, float):
        return Fraction(k)
    if isinstance(k, PairV):
        return PairV(_exact_key(k.fst), _exact_key(k.snd))
    if isinstance(k, tuple):
        return tuple(_exact_key(x) for x in k)
    return k


def concrete_of(v):
    """The concrete value of a sample-free symbolic value, or raise EvalError."""
    if isinstance(v, Const):
        return v.value
    if isinstance(v, (SVar, App)):
        raise EvalError(f"value is symbolic: {v}")
    if isinstance(v, tuple):
        return tuple(concrete_of(x) for x in v)
    if isinstance(v, PairV):
        return PairV(concrete_of(v.fst), concrete_of(v.snd))
    if isinstance(v, Just):
        return Just(concrete_of(v.value))
    if isinstance(v, MapV):
        return MapV(tuple((k, concrete_of(x)) for k, x in v.items))
    if isinstance(v, Union):
        raise EvalError("value is a union")
    return v


def _is_term(v) -> bool:
    return isinstance(v, (SVar, Const, App))


def merge(g, a, b):
    """``a`` where guard ``g`` holds, ``b`` elsewhere."""
    if a is POISON:
        return b
    if b is POISON:
        return a
    if a == b:
        return a
    if isinstance(g, Const):
        return a if g.value else b
    if _is_term(a) and _is_term(b):
        return T.ite(g, a, b)
    if isinstance(a, PairV) and isinstance(b, PairV):
        return PairV(merge(g, a.fst, b.fst), merge(g, a.snd, b.snd))
    if isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b):
        return tuple(merge(g, x, y) for x, y in zip(a, b))
    if isinstance(a, Just) and isinstance(b, Just):
        return Just(merge(g, a.value, b.value))
    if (isinstance(a, MapV) and isinstance(b, MapV)
            and [k for k, _ in a.items] == [k for k, _ in b.items]):
        return MapV(tuple((k, merge(g, x, y)) for (k, x), (_, y) in zip(a.items, b.items)))
    alts = []
    for guard, v in ((g, a), (mk("not", g), b)):
        if isinstance(v, Union):
            alts.extend((T.conj([guard, h]), w) for h, w in v.alts)
        else:
            alts.append((guard, v))
    return Union(tuple(alts))


def merge_all(guarded: list):
    """Merge ``[(guard, value), ...]`` whose guards partition the context."""
    live = [(g, v) for g, v in guarded if v is not POISON
            and not (isinstance(g, Const) and not g.value)]
    if not live:
        return POISON
    out = live[-1][1]
    for g, v in reversed(live[:-1]):
        out = merge(g, v, out)
    return out


def _on(v, f):
    if isinstance(v, Union):
        return merge_all([(g, _on(a, f)) for g, a in v.alts])
    if v is POISON:
        return POISON
    return f(v)


def split_unions(v) -> list:
    """All ``(guards, value)`` with the unions of ``v`` resolved."""
    if isinstance(v, Union):
        out = []
        for g, a in v.alts:
            out.extend(((g,) + gs, w) for gs, w in split_unions(a))
        return out
    if isinstance(v, PairV):
        return [(ga + gb, PairV(a, b))
                for ga, a in split_unions(v.fst) for gb, b in split_unions(v.snd)]
    if isinstance(v, tuple):
        acc = [((), ())]
        for x in v:
            acc = [(gs + gx, xs + (w,)) for gs, xs in acc for gx, w in split_unions(x)]
        return acc
    if isinstance(v, Just):
        return [(gs, Just(w)) for gs, w in split_unions(v.value)]
    if isinstance(v, MapV):
        acc = [((), ())]
        for k, x in v.items:
            acc = [(gs + gx, xs + ((k, w),)) for gs, xs in acc for gx, w in split_unions(x)]
        return [(gs, MapV(items)) for gs, items in acc]
    return [((), v)]


def eval_value(v, samples):
    """Concrete (exact) value of a symbolic value under sample assignment."""
    if _is_term(v):
        return T.evaluate(v, samples)
    if isinstance(v, Union):
        for g, a in v.alts:
            if T.evaluate(g, samples):
                return eval_value(a, samples)
        raise EvalError("no union alternative holds")
    if isinstance(v, tuple):
        return tuple(eval_value(x, samples) for x in v)
    if isinstance(v, PairV):
        return PairV(eval_value(v.fst, samples), eval_value(v.snd, samples))
    if isinstance(v, Just):
        return Just(eval_value(v.value, samples))
    if isinstance(v, MapV):
        return MapV(tuple((k, eval_value(x, samples)) for k, x in v.items))
    return v


# ---------------------------------------------------------------------------
# Pure evaluation


def _key(k):
    return _on(k, lambda x: _exact_key(concrete_of(x)))


_CMP_OPS = {D.Lt: "<", D.Le: "<=", D.Eq: "="}
_ARITH_OPS = {D.Add: "+", D.Sub: "-", D.Mul: "*", D.Div: "/", D.Mod: "mod"}


def spure(e: D.Expr, env: dict):
    """Evaluate a pure expression to a symbolic value."""
    t = type(e)
    if t is D.Var:
        return env[e.name]
    if t is D.Lit:
        return lift(e.value, e.ty)
    op = _ARITH_OPS.get(t) or _CMP_OPS.get(t)
    if op is not None:
        return mk(op, spure(e.a, env), spure(e.b, env))
    if t is D.Neg:
        return mk("neg", spure(e.a, env))
    if t is D.ToReal:
        return mk("to_real", spure(e.a, env))
    if t is D.Not:
        return mk("not", spure(e.a, env))
    if t is D.And:
        return mk("and", spure(e.a, env), spure(e.b, env))
    if t is D.Or:
        return mk("or", spure(e.a, env), spure(e.b, env))
    if t is D.Pair:
        return PairV(spure(e.a, env), spure(e.b, env))
    if t is D.Fst:
        return _on(spure(e.p, env), lambda p: p.fst)
    if t is D.Snd:
        return _on(spure(e.p, env), lambda p: p.snd)
    if t is D.Nil:
        return ()
    if t is D.Cons:
        h = spure(e.head, env)
        return _on(spure(e.tail, env), lambda xs: (h,) + xs)
    if t is D.Snoc:
        x = spure(e.last, env)
        return _on(spure(e.init, env), lambda xs: xs + (x,))
    if t is D.Uncons:
        return _on(spure(e.lst, env),
                   lambda xs: Just(PairV(xs[0], xs[1:])) if xs else NOTHING)
    if t is D.IsNil:
        return _on(spure(e.lst, env), lambda xs: Const(len(xs) == 0, T.BOOL))
    if t is D.Length:
        return _on(spure(e.lst, env), lambda xs: Const(len(xs), T.INT))
    if t is D.MapEmpty:
        return MapV()
    if t is D.MapInsert:
        v = spure(e.v, env)
        m = spure(e.m, env)
        return _on(spure(e.k, env),
                   lambda k: _on(m, lambda mm: mm.insert(_key(k), v)))
    if t is D.MapLookup:
        m = spure(e.m, env)
        return _on(spure(e.k, env), lambda k: _on(m, lambda mm: mm.lookup(_key(k))))
    if t is D.MapSize:
        return _on(spure(e.m, env), lambda m: Const(len(m.items), T.INT))
    if t is D.JustE:
        return Just(spure(e.a, env))
    if t is D.NothingE:
        return NOTHING
    if t is D.IsJust:
        return _on(spure(e.m, env), lambda m: Const(isinstance(m, Just), T.BOOL))
    if t is D.FromJust:
        m = spure(e.m, env)
        if m is NOTHING:
            raise EvalError("fromJust applied to nothing")
        return _on(m, lambda x: x.value if isinstance(x, Just) else POISON)
    raise EvalError(f"not a pure expression: {t.__name__}")


# ---------------------------------------------------------------------------
# Results


class SymSample(NamedTuple):
    var: SVar
    center: Any  # term, possibly mentioning earlier samples
    width: float


@dataclass(frozen=True)
class PathResult:
    output: Any
    path_condition: Any
    samples: tuple = ()
    truncated: bool = False
    conds: tuple = field(default=(), compare=False)

    def __str__(self):
        tag = " (truncated)" if self.truncated else ""
        return f"{self.output} if {self.path_condition}{tag}"


# ---------------------------------------------------------------------------
# Loop unrolling policy


def _measure(v):
    if isinstance(v, MapV):
        return frozenset(v.keys())
    if isinstance(v, tuple):
        return len(v)
    if isinstance(v, (Const,)):
        return v.value
    return v


def _leq(a, b) -> bool:
    if isinstance(a, frozenset):
        return a <= b
    return a <= b


class MetricBound:
    """Largest metric values observed on instrumented runs of one loop."""

    def __init__(self, observed=()):
        self.maxima: list = []
        for v in observed:
            self.add(v)

    def add(self, v):
        v = _measure(v)
        if any(_leq(v, m) for m in self.maxima):
            return
        self.maxima = [m for m in self.maxima if not _leq(m, v)] + [v]

    def exceeded_by(self, v) -> bool:
        v = _measure(v)
        return not any(_leq(v, m) for m in self.maxima)


def unroll_policy(observed_max) -> "callable":
    """Cutoff predicate: true once a metric value exceeds every observed one."""
    bound = MetricBound([observed_max])
    return bound.exceeded_by


class UnrollPolicy:
    def __init__(self, bounds: dict | None = None, max_unroll: int = DEFAULT_MAX_UNROLL):
        self.bounds = dict(bounds or {})
        self.max_unroll = max_unroll

    def cut(self, label: str, metric_value) -> bool:
        bound = self.bounds.get(label)
        if bound is None:
            return True
        return bound.exceeded_by(metric_value)

    @classmethod
    def from_runs(cls, runs, max_unroll: int = DEFAULT_MAX_UNROLL) -> "UnrollPolicy":
        return cls(observe_loop_metrics(runs), max_unroll)


def observe_loop_metrics(runs) -> dict:
    """Per loop label, the bound of observed metric values.

    Raises MetricNotMonotone if any run's metric sequence ever decreases.
    """
    bounds: dict[str, MetricBound] = {}
    for r in runs:
        for label, invocations in r.loop_metrics.items():
            b = bounds.setdefault(label, MetricBound())
            for seq in invocations:
                seq = [_measure(lift(v)) for v in seq]
                for prev, cur in zip(seq, seq[1:]):
                    if not _leq(prev, cur):
                        raise MetricNotMonotone(
                            f"loop {label!r}: metric went from {prev} to {cur}")
                for v in seq:
                    b.add(v)
    return bounds


# ---------------------------------------------------------------------------
# Path engine

TRUNC = object()


class _St(NamedTuple):
    samples: tuple = ()
    conds: tuple = ()
    steps: tuple = ()

    def assume(self, c):
        return _St(self.samples, self.conds + (c,), self.steps + (("assert", c),))


class PathExplorer:
    def __init__(self, policy: UnrollPolicy | None = None):
        self.policy = policy or UnrollPolicy(max_unroll=DEFAULT_MAX_UNROLL)

    def paths(self, e: D.Expr, env: dict | None = None) -> Iterator[tuple[Any, _St]]:
        yield from self._go(e, dict(env or {}), _St())

    def _go(self, e, env, st):
        t = type(e)
        if t is D.Return:
            yield spure(e.a, env), st
        elif t is D.Bind:
            for v, st1 in self._go(e.m, env, st):
                if v is TRUNC:
                    yield v, st1
                else:
                    yield from self._go(e.body, {**env, e.var.name: v}, st1)
        elif t is D.Laplace:
            c = spure(e.center, env)
            j = len(st.samples)
            yield SVar(j), _St(st.samples + ((c, e.width),), st.conds,
                               st.steps + (("lap", c, e.width),))
        elif t is D.If:
            c = spure(e.cond, env)
            if isinstance(c, Const):
                yield from self._go(e.then if c.value else e.orelse, env, st)
            else:
                yield from self._go(e.then, env, st.assume(c))
                yield from self._go(e.orelse, env, st.assume(mk("not", c)))
        elif t is D.Seq:
            for v, st1 in self._go(e.first, env, st):
                if v is TRUNC:
                    yield v, st1
                else:
                    yield from self._go(e.rest, env, st1)
        elif t is D.Assert:
            c = spure(e.cond, env)
            if isinstance(c, Const):
                if c.value:
                    yield (), st
            else:
                yield (), st.assume(c)
        elif t is D.Abort:
            yield TRUNC, st
        elif t is D.Loop:
            yield from self._loop(e, env, st)
        else:
            raise EvalError(f"not a distribution expression: {t.__name__}")

    def _loop(self, e: D.Loop, env, st):
        stack = [(spure(e.init, env), st, 0)]
        while stack:
            v, s, n = stack.pop()
            env2 = {**env, e.var.name: v}
            if e.metric is not None:
                m = concrete_of(spure(e.metric, env2))
                if self.policy.cut(e.label, m):
                    yield TRUNC, s
                    continue
            c = spure(e.cond, env2)
            if isinstance(c, Const):
                branches = [(c.value, s)]
            else:
                branches = [(False, s.assume(mk("not", c))), (True, s.assume(c))]
            for taken, s2 in branches:
                if not taken:
                    yield v, s2
                elif n >= self.policy.max_unroll:
                    yield TRUNC, s2
                else:
                    nxt = [(v2, s3, n + 1) for v2, s3 in self._go(e.body, env2, s2)]
                    for v2, s3, k in reversed(nxt):
                        if v2 is TRUNC:
                            yield v2, s3
                        else:
                            stack.append((v2, s3, k))


def _result(v, st: _St) -> PathResult:
    samples = tuple(SymSample(SVar(j), c, w) for j, (c, w) in enumerate(st.samples))
    if v is TRUNC:
        return PathResult(None, T.conj(st.conds), samples, True, st.conds)
    return PathResult(v, T.conj(st.conds), samples, False, st.conds)


def explore(e: D.Expr, policy: UnrollPolicy | None = None,
            if_budget: int = DEFAULT_IF_BUDGET) -> list[PathResult]:
    """All control-flow paths of ``e`` as PathResults (truncated ones included)."""
    out = []
    for v, st in PathExplorer(policy).paths(e):
        out.append(_result(v, st))
        if len(out) > if_budget:
            raise BudgetExceeded(f"more than {if_budget} paths; try the merged engine")
    return out


def streamline(e: D.Expr, if_budget: int = DEFAULT_IF_BUDGET,
               policy: UnrollPolicy | None = None) -> list[D.Expr]:
    """If-free programs, one per path, with branch choices turned into asserts."""
    ty = e.type.inner
    out = []
    for v, st in PathExplorer(policy).paths(e):
        out.append(_residual(v, st, ty))
        if len(out) > if_budget:
            raise BudgetExceeded(f"more than {if_budget} straight-line programs")
    return out


def symbolic_run(prog: D.Expr, policy: UnrollPolicy | None = None) -> PathResult:
    """Symbolically execute one straight-line program."""
    results = [_result(v, st) for v, st in PathExplorer(policy).paths(prog)]
    if len(results) != 1:
        if not results:
            return PathResult(None, T.FALSE, (), True)
        raise EvalError("symbolic_run expects a straight-line program")
    return results[0]


def _svar_expr(j: int) -> D.Var:
    return D.Var(f"s{j}", D.REAL)


def _residual(v, st: _St, ty: D.Type) -> D.Expr:
    body = D.Abort("cutoff", ty) if v is TRUNC else D.Return(value_to_expr(v, ty))
    j = len(st.samples)
    for step in reversed(st.steps):
        if step[0] == "lap":
            j -= 1
            body = D.Bind(D.Laplace(term_to_expr(step[1]), step[2]), _svar_expr(j), body)
        else:
            body = D.Seq(D.Assert(term_to_expr(step[1])), body)
    return body


_BIN = {"+": D.Add, "-": D.Sub, "*": D.Mul, "/": D.Div, "mod": D.Mod,
        "<": D.Lt, "<=": D.Le, "=": D.Eq}
_SORT_TY = {T.REAL: D.REAL, T.INT: D.INT, T.BOOL: D.BOOL}


def term_to_expr(t) -> D.Expr:
    if isinstance(t, SVar):
        return _svar_expr(t.index)
    if isinstance(t, Const):
        return D.Lit(t.value, _SORT_TY[t.sort])
    if t.op in _BIN:
        return _BIN[t.op](term_to_expr(t.args[0]), term_to_expr(t.args[1]))
    if t.op in ("and", "or"):
        ctor = D.And if t.op == "and" else D.Or
        args = [term_to_expr(a) for a in t.args]
        out = args[0]
        for a in args[1:]:
            out = ctor(out, a)
        return out
    if t.op == "not":
        return D.Not(term_to_expr(t.args[0]))
    if t.op == "neg":
        return D.Neg(term_to_expr(t.args[0]))
    if t.op == "to_real":
        return D.ToReal(term_to_expr(t.args[0]))
    raise EvalError(f"cannot express {t.op} in a straight-line program")


def value_to_expr(v, ty: D.Type) -> D.Expr:
    if _is_term(v):
        return term_to_expr(v)
    if isinstance(ty, D.PairT):
        return D.Pair(value_to_expr(v.fst, ty.fst), value_to_expr(v.snd, ty.snd))
    if isinstance(ty, D.ListT):
        out: D.Expr = D.Nil(ty.elem)
        for x in v:
            out = D.Snoc(out, value_to_expr(x, ty.elem))
        return out
    if isinstance(ty, D.MaybeT):
        if v is NOTHING:
            return D.NothingE(ty.elem)
        return D.JustE(value_to_expr(v.value, ty.elem))
    if isinstance(ty, D.MapT):
        out = D.MapEmpty(ty.key, ty.val)
        for k, x in v.items:
            out = D.MapInsert(D.Lit(k, ty.key) if not isinstance(k, PairV)
                              else value_to_expr(lift(k, ty.key), ty.key),
                              value_to_expr(x, ty.val), out)
        return out
    if ty == D.UNIT:
        return D.Lit((), D.UNIT)
    raise EvalError(f"cannot express value {v!r} of type {ty}")


# ---------------------------------------------------------------------------
# Merged engine


class _Alt(NamedTuple):
    value: Any
    samples: tuple = ()
    conds: tuple = ()
    truncated: bool = False

    def assume(self, c):
        return self._replace(conds=self.conds + (c,))


def _signature(a: _Alt):
    return tuple(w for _, w in a.samples)


def _merge_pair(a: _Alt, b: _Alt) -> _Alt:
    k = 0
    while k < min(len(a.conds), len(b.conds)) and a.conds[k] == b.conds[k]:
        k += 1
    ga, gb = T.conj(a.conds[k:]), T.conj(b.conds[k:])
    samples = tuple((T.ite(ga, ca, cb), w) for (ca, w), (cb, _) in zip(a.samples, b.samples))
    joined = T.disj([ga, gb])
    conds = a.conds[:k] + ((joined,) if not (isinstance(joined, Const) and joined.value) else ())
    return _Alt(merge(ga, a.value, b.value), samples, conds)


def merge_alts(alts: list) -> list:
    groups: dict = {}
    out = []
    for a in alts:
        if a.truncated:
            out.append(a)
            continue
        sig = _signature(a)
        groups[sig] = _merge_pair(groups[sig], a) if sig in groups else a
    return list(groups.values()) + out


class MergedExplorer:
    def __init__(self, policy: UnrollPolicy | None = None):
        self.policy = policy or UnrollPolicy(max_unroll=DEFAULT_MAX_UNROLL)

    def run(self, e, env, alt: _Alt) -> list:
        t = type(e)
        if t is D.Return:
            return [alt._replace(value=spure(e.a, env))]
        if t is D.Bind:
            out = []
            for a in self.run(e.m, env, alt):
                if a.truncated:
                    out.append(a)
                else:
                    out.extend(self.run(e.body, {**env, e.var.name: a.value}, a))
            return out
        if t is D.Laplace:
            c = spure(e.center, env)
            j = len(alt.samples)
            return [_Alt(SVar(j), alt.samples + ((c, e.width),), alt.conds)]
        if t is D.If:
            c = spure(e.cond, env)
            if isinstance(c, Const):
                return self.run(e.then if c.value else e.orelse, env, alt)
            return merge_alts(self.run(e.then, env, alt.assume(c))
                              + self.run(e.orelse, env, alt.assume(mk("not", c))))
        if t is D.Seq:
            out = []
            for a in self.run(e.first, env, alt):
                out.extend([a] if a.truncated else self.run(e.rest, env, a))
            return out
        if t is D.Assert:
            c = spure(e.cond, env)
            if isinstance(c, Const):
                return [alt._replace(value=())] if c.value else []
            return [_Alt((), alt.samples, alt.conds + (c,))]
        if t is D.Abort:
            return [alt._replace(value=None, truncated=True)]
        if t is D.Loop:
            return self._loop(e, env, alt)
        raise EvalError(f"not a distribution expression: {t.__name__}")

    def _loop(self, e: D.Loop, env, alt: _Alt) -> list:
        frontier = [alt._replace(value=spure(e.init, env))]
        exits, n = [], 0
        while frontier:
            nxt = []
            for a in frontier:
                pieces = [a]
                if e.metric is not None:
                    pieces = [_Alt(v, a.samples, a.conds + gs, False)
                              for gs, v in split_unions(a.value)]
                for p in pieces:
                    env2 = {**env, e.var.name: p.value}
                    if e.metric is not None:
                        m = concrete_of(spure(e.metric, env2))
                        if self.policy.cut(e.label, m):
                            exits.append(p._replace(value=None, truncated=True))
                            continue
                    c = spure(e.cond, env2)
                    if isinstance(c, Const):
                        if not c.value:
                            exits.append(p)
                            continue
                    else:
                        exits.append(p.assume(mk("not", c)))
                        p = p.assume(c)
                    if n >= self.policy.max_unroll:
                        exits.append(p._replace(value=None, truncated=True))
                    else:
                        nxt.extend(self.run(e.body, env2, p))
            frontier = []
            for a in merge_alts(nxt) if e.metric is None else nxt:
                (exits if a.truncated else frontier).append(a)
            n += 1
        return merge_alts(exits) if e.metric is None else exits


def merged_symbolic_run(e: D.Expr, policy: UnrollPolicy | None = None,
                        if_budget: int = DEFAULT_IF_BUDGET) -> list[PathResult]:
    alts = MergedExplorer(policy).run(e, {}, _Alt(None))
    if len(alts) > if_budget:
        raise BudgetExceeded(f"more than {if_budget} merged states")
    out = []
    for a in alts:
        samples = tuple(SymSample(SVar(j), c, w) for j, (c, w) in enumerate(a.samples))
        out.append(PathResult(a.value, T.conj(a.conds), samples, a.truncated, a.conds))
    return out


# ---------------------------------------------------------------------------
# Soundness helper


def paths_for_trace(paths: list[PathResult], samples) -> list[PathResult]:
    """Non-truncated paths whose condition holds for the given sample values."""
    samples = [Fraction(s) for s in samples]
    hits = []
    for p in paths:
        if p.truncated or len(p.samples) != len(samples):
            continue
        if T.evaluate(p.path_condition, samples):
            hits.append(p)
    return hits
