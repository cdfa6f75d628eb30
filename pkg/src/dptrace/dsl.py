"""Typed AST for the probabilistic language.

Programs are built with the lower-case smart constructors at the bottom of
this module.  Binders (``bind``, ``loop``) take Python callables, which are
applied once to fresh variables so that the stored tree is first order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from .errors import InvalidWidth, TypeMismatch

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Type:
    pass


@dataclass(frozen=True)
class Prim(Type):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PairT(Type):
    fst: Type
    snd: Type

    def __str__(self):
        return f"({self.fst}, {self.snd})"


@dataclass(frozen=True)
class ListT(Type):
    elem: Type

    def __str__(self):
        return f"[{self.elem}]"


@dataclass(frozen=True)
class MapT(Type):
    key: Type
    val: Type

    def __str__(self):
        return f"{{{self.key} => {self.val}}}"


@dataclass(frozen=True)
class MaybeT(Type):
    elem: Type

    def __str__(self):
        return f"maybe {self.elem}"


@dataclass(frozen=True)
class DistT(Type):
    inner: Type

    def __str__(self):
        return f"dist {self.inner}"


BOOL = Prim("bool")
INT = Prim("int")
REAL = Prim("real")
UNIT = Prim("unit")

NUMERIC = (INT, REAL)


# ---------------------------------------------------------------------------
# Runtime values shared by the interpreters.  Lists are tuples, unit is ().


@dataclass(frozen=True, order=True)
class PairV:
    fst: Any
    snd: Any

    def __str__(self):
        return f"({self.fst}, {self.snd})"


@dataclass(frozen=True)
class Just:
    value: Any

    def __str__(self):
        return f"just {self.value}"


class _Nothing:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NOTHING"

    __str__ = __repr__

    def __reduce__(self):
        return (_Nothing, ())


NOTHING = _Nothing()
UNIT_V = ()


@dataclass(frozen=True)
class MapV:
    """Finite map, items kept sorted by key."""

    items: tuple = ()

    def insert(self, key, value) -> "MapV":
        d = dict(self.items)
        d[key] = value
        return MapV(tuple(sorted(d.items(), key=lambda kv: sort_key(kv[0]))))

    def lookup(self, key):
        for k, v in self.items:
            if k == key:
                return Just(v)
        return NOTHING

    def keys(self):
        return [k for k, _ in self.items]

    def __str__(self):
        return "{" + ", ".join(f"{k}: {v}" for k, v in self.items) + "}"


def sort_key(v):
    """Total order on concrete key values (numbers, pairs, tuples)."""
    if isinstance(v, PairV):
        return (sort_key(v.fst), sort_key(v.snd))
    if isinstance(v, tuple):
        return tuple(sort_key(x) for x in v)
    return v


# ---------------------------------------------------------------------------
# Expressions

_fresh = itertools.count()


def fresh_name(prefix: str = "v") -> str:
    return f"{prefix}{next(_fresh)}"


@dataclass(frozen=True, eq=True)
class Expr:
    def __post_init__(self):
        object.__setattr__(self, "type", self.infer())

    def infer(self) -> Type:  # pragma: no cover - abstract
        raise NotImplementedError

    def children(self) -> tuple["Expr", ...]:
        return tuple(getattr(self, f) for f in self.__dataclass_fields__
                     if isinstance(getattr(self, f), Expr))

    # arithmetic sugar; comparisons are plain functions (lt, gt, ...)
    def __add__(self, other):
        return Add(self, _coerce(other, self))

    def __radd__(self, other):
        return Add(_coerce(other, self), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other, self))

    def __rsub__(self, other):
        return Sub(_coerce(other, self), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other, self))

    def __rmul__(self, other):
        return Mul(_coerce(other, self), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other, self))

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return pretty(self)


def _coerce(x, like: Expr) -> Expr:
    if isinstance(x, Expr):
        return x
    if like.type == REAL and isinstance(x, int) and not isinstance(x, bool):
        x = float(x)
    return lit(x)


def _expect(node, expected: Type, found: Type):
    if expected != found:
        raise TypeMismatch(node, expected, found)


def _expect_dist(node, t: Type) -> Type:
    if not isinstance(t, DistT):
        raise TypeMismatch(node, "dist _", t)
    return t.inner


@dataclass(frozen=True, eq=True)
class Lit(Expr):
    value: Any
    ty: Type

    def infer(self):
        check_value(self.value, self.ty, self)
        return self.ty


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str
    ty: Type

    def infer(self):
        return self.ty


@dataclass(frozen=True, eq=True)
class _Arith(Expr):
    a: Expr
    b: Expr

    def infer(self):
        if self.a.type not in NUMERIC:
            raise TypeMismatch(self, "int or real", self.a.type)
        _expect(self, self.a.type, self.b.type)
        return self.a.type


class Add(_Arith):
    op = "+"


class Sub(_Arith):
    op = "-"


class Mul(_Arith):
    op = "*"


@dataclass(frozen=True, eq=True)
class Div(Expr):
    a: Expr
    b: Expr
    op = "/"

    def infer(self):
        _expect(self, REAL, self.a.type)
        _expect(self, REAL, self.b.type)
        return REAL


@dataclass(frozen=True, eq=True)
class Mod(Expr):
    a: Expr
    b: Expr
    op = "mod"

    def infer(self):
        _expect(self, INT, self.a.type)
        _expect(self, INT, self.b.type)
        return INT


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    a: Expr

    def infer(self):
        if self.a.type not in NUMERIC:
            raise TypeMismatch(self, "int or real", self.a.type)
        return self.a.type


@dataclass(frozen=True, eq=True)
class ToReal(Expr):
    a: Expr

    def infer(self):
        _expect(self, INT, self.a.type)
        return REAL


@dataclass(frozen=True, eq=True)
class _Cmp(Expr):
    a: Expr
    b: Expr

    def infer(self):
        if self.a.type not in NUMERIC:
            raise TypeMismatch(self, "int or real", self.a.type)
        _expect(self, self.a.type, self.b.type)
        return BOOL


class Lt(_Cmp):
    op = "<"


class Le(_Cmp):
    op = "<="


@dataclass(frozen=True, eq=True)
class Eq(Expr):
    a: Expr
    b: Expr
    op = "=="

    def infer(self):
        if self.a.type not in (INT, REAL, BOOL):
            raise TypeMismatch(self, "int, real or bool", self.a.type)
        _expect(self, self.a.type, self.b.type)
        return BOOL


@dataclass(frozen=True, eq=True)
class Not(Expr):
    a: Expr

    def infer(self):
        _expect(self, BOOL, self.a.type)
        return BOOL


@dataclass(frozen=True, eq=True)
class And(Expr):
    a: Expr
    b: Expr

    def infer(self):
        _expect(self, BOOL, self.a.type)
        _expect(self, BOOL, self.b.type)
        return BOOL


@dataclass(frozen=True, eq=True)
class Or(And):
    pass


# containers


@dataclass(frozen=True, eq=True)
class Nil(Expr):
    elem: Type

    def infer(self):
        return ListT(self.elem)


@dataclass(frozen=True, eq=True)
class Cons(Expr):
    head: Expr
    tail: Expr

    def infer(self):
        _expect(self, ListT(self.head.type), self.tail.type)
        return self.tail.type


@dataclass(frozen=True, eq=True)
class Snoc(Expr):
    init: Expr
    last: Expr

    def infer(self):
        _expect(self, ListT(self.last.type), self.init.type)
        return self.init.type


def _list_elem(node, t: Type) -> Type:
    if not isinstance(t, ListT):
        raise TypeMismatch(node, "list", t)
    return t.elem


@dataclass(frozen=True, eq=True)
class Uncons(Expr):
    lst: Expr

    def infer(self):
        el = _list_elem(self, self.lst.type)
        return MaybeT(PairT(el, self.lst.type))


@dataclass(frozen=True, eq=True)
class IsNil(Expr):
    lst: Expr

    def infer(self):
        _list_elem(self, self.lst.type)
        return BOOL


@dataclass(frozen=True, eq=True)
class Length(Expr):
    lst: Expr

    def infer(self):
        _list_elem(self, self.lst.type)
        return INT


@dataclass(frozen=True, eq=True)
class Pair(Expr):
    a: Expr
    b: Expr

    def infer(self):
        return PairT(self.a.type, self.b.type)


@dataclass(frozen=True, eq=True)
class Fst(Expr):
    p: Expr

    def infer(self):
        if not isinstance(self.p.type, PairT):
            raise TypeMismatch(self, "pair", self.p.type)
        return self.p.type.fst


@dataclass(frozen=True, eq=True)
class Snd(Expr):
    p: Expr

    def infer(self):
        if not isinstance(self.p.type, PairT):
            raise TypeMismatch(self, "pair", self.p.type)
        return self.p.type.snd


@dataclass(frozen=True, eq=True)
class MapEmpty(Expr):
    key: Type
    val: Type

    def infer(self):
        return MapT(self.key, self.val)


@dataclass(frozen=True, eq=True)
class MapInsert(Expr):
    k: Expr
    v: Expr
    m: Expr

    def infer(self):
        _expect(self, MapT(self.k.type, self.v.type), self.m.type)
        return self.m.type


@dataclass(frozen=True, eq=True)
class MapLookup(Expr):
    k: Expr
    m: Expr

    def infer(self):
        if not isinstance(self.m.type, MapT):
            raise TypeMismatch(self, "map", self.m.type)
        _expect(self, self.m.type.key, self.k.type)
        return MaybeT(self.m.type.val)


@dataclass(frozen=True, eq=True)
class MapSize(Expr):
    m: Expr

    def infer(self):
        if not isinstance(self.m.type, MapT):
            raise TypeMismatch(self, "map", self.m.type)
        return INT


@dataclass(frozen=True, eq=True)
class JustE(Expr):
    a: Expr

    def infer(self):
        return MaybeT(self.a.type)


@dataclass(frozen=True, eq=True)
class NothingE(Expr):
    elem: Type

    def infer(self):
        return MaybeT(self.elem)


@dataclass(frozen=True, eq=True)
class IsJust(Expr):
    m: Expr

    def infer(self):
        if not isinstance(self.m.type, MaybeT):
            raise TypeMismatch(self, "maybe", self.m.type)
        return BOOL


@dataclass(frozen=True, eq=True)
class FromJust(Expr):
    m: Expr

    def infer(self):
        if not isinstance(self.m.type, MaybeT):
            raise TypeMismatch(self, "maybe", self.m.type)
        return self.m.type.elem


# distribution-level nodes


@dataclass(frozen=True, eq=True)
class Return(Expr):
    a: Expr

    def infer(self):
        return DistT(self.a.type)


@dataclass(frozen=True, eq=True)
class Laplace(Expr):
    center: Expr
    width: float

    def infer(self):
        _expect(self, REAL, self.center.type)
        if isinstance(self.width, Expr) or not (self.width > 0 and math.isfinite(self.width)):
            raise InvalidWidth(self.width)
        return DistT(REAL)


@dataclass(frozen=True, eq=True)
class Bind(Expr):
    m: Expr
    var: Var
    body: Expr

    def infer(self):
        a = _expect_dist(self, self.m.type)
        _expect(self, a, self.var.type)
        _expect_dist(self, self.body.type)
        return self.body.type


@dataclass(frozen=True, eq=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Expr

    def infer(self):
        _expect(self, BOOL, self.cond.type)
        _expect_dist(self, self.then.type)
        _expect(self, self.then.type, self.orelse.type)
        return self.then.type


@dataclass(frozen=True, eq=True)
class Assert(Expr):
    cond: Expr

    def infer(self):
        _expect(self, BOOL, self.cond.type)
        return DistT(UNIT)


@dataclass(frozen=True, eq=True)
class Seq(Expr):
    first: Expr
    rest: Expr

    def infer(self):
        _expect(self, DistT(UNIT), self.first.type)
        _expect_dist(self, self.rest.type)
        return self.rest.type


@dataclass(frozen=True, eq=True)
class Abort(Expr):
    message: str
    ty: Type

    def infer(self):
        return DistT(self.ty)


@dataclass(frozen=True, eq=True)
class Loop(Expr):
    """``while cond(state): state <- body(state)`` starting from ``init``.

    ``metric`` is an optional expression over the state whose value must be
    nondecreasing across iterations; the symbolic engine uses it to stop
    unrolling.  ``label`` identifies the loop across program instances.
    """

    init: Expr
    var: Var
    cond: Expr
    body: Expr
    metric: Expr | None = None
    label: str = "loop"

    def infer(self):
        _expect(self, self.init.type, self.var.type)
        _expect(self, BOOL, self.cond.type)
        _expect(self, DistT(self.init.type), self.body.type)
        return DistT(self.init.type)


# ---------------------------------------------------------------------------
# Value/type agreement


def type_of_value(v) -> Type:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return INT
    if isinstance(v, (float, Fraction)):
        return REAL
    if v == ():
        return UNIT
    raise TypeError(f"cannot infer a type for literal {v!r}; pass it explicitly")


def check_value(v, t: Type, node=None):
    ok = True
    if t == BOOL:
        ok = isinstance(v, bool)
    elif t == INT:
        ok = isinstance(v, int) and not isinstance(v, bool)
    elif t == REAL:
        ok = isinstance(v, (float, Fraction)) or (isinstance(v, int) and not isinstance(v, bool))
    elif t == UNIT:
        ok = v == ()
    elif isinstance(t, PairT):
        ok = isinstance(v, PairV)
        if ok:
            check_value(v.fst, t.fst, node)
            check_value(v.snd, t.snd, node)
    elif isinstance(t, ListT):
        ok = isinstance(v, tuple)
        if ok:
            for x in v:
                check_value(x, t.elem, node)
    elif isinstance(t, MaybeT):
        ok = v is NOTHING or isinstance(v, Just)
        if isinstance(v, Just):
            check_value(v.value, t.elem, node)
    elif isinstance(t, MapT):
        ok = isinstance(v, MapV)
        if ok:
            for k, x in v.items:
                check_value(k, t.key, node)
                check_value(x, t.val, node)
    else:
        ok = False
    if not ok:
        raise TypeMismatch(node, t, type(v).__name__)


# ---------------------------------------------------------------------------
# Whole-program checks


def typecheck(e: Expr) -> Type:
    """Re-derive the type of a closed expression, checking every node."""
    _check(e, frozenset())
    return e.type


def _check(e: Expr, bound: frozenset):
    if isinstance(e, Var):
        if e.name not in bound:
            raise TypeMismatch(e, "bound variable", f"free {e.name}")
        return
    if isinstance(e, Bind):
        _check(e.m, bound)
        _check(e.body, bound | {e.var.name})
    elif isinstance(e, Loop):
        _check(e.init, bound)
        inner = bound | {e.var.name}
        _check(e.cond, inner)
        _check(e.body, inner)
        if e.metric is not None:
            _check(e.metric, inner)
    else:
        for c in e.children():
            _check(c, bound)
    if e.infer() != e.type:
        raise TypeMismatch(e, e.infer(), e.type)


UNBOUNDED = math.inf


def count_laplace(e: Expr) -> float:
    """Upper bound on Laplace calls along any single execution.

    Exact for loop-free programs; ``UNBOUNDED`` when a loop body samples.
    """
    if isinstance(e, Laplace):
        return 1
    if isinstance(e, If):
        return max(count_laplace(e.then), count_laplace(e.orelse))
    if isinstance(e, Bind):
        return count_laplace(e.m) + count_laplace(e.body)
    if isinstance(e, Seq):
        return count_laplace(e.first) + count_laplace(e.rest)
    if isinstance(e, Loop):
        return UNBOUNDED if count_laplace(e.body) > 0 else 0
    return 0


def count_ifs(e: Expr) -> int:
    return int(isinstance(e, If)) + sum(count_ifs(c) for c in e.children())


def alpha_equal(a: Expr, b: Expr) -> bool:
    """Structural equality up to renaming of bound variables."""
    return _alpha(a, b, {}, {})


def _alpha(a, b, ea: dict, eb: dict) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return a.ty == b.ty and ea.get(a.name, a.name) == eb.get(b.name, b.name)
    if isinstance(a, (Bind, Loop)):
        tag = fresh_name("_a")
        ea, eb = {**ea, a.var.name: tag}, {**eb, b.var.name: tag}
    for f in a.__dataclass_fields__:
        x, y = getattr(a, f), getattr(b, f)
        if f == "var":
            continue
        if isinstance(x, Expr) or isinstance(y, Expr):
            if not (isinstance(x, Expr) and isinstance(y, Expr) and _alpha(x, y, ea, eb)):
                return False
        elif x != y:
            return False
    return True


# ---------------------------------------------------------------------------
# Pretty printer (debugging aid, no stability promise)


def pretty(e: Expr) -> str:
    match e:
        case Lit(value=v):
            return str(v)
        case Var(name=n):
            return n
        case Return(a=a):
            return f"return {pretty(a)}"
        case Laplace(center=c, width=w):
            return f"lap({pretty(c)}, {w})"
        case Bind(m=m, var=v, body=b):
            return f"{v.name} <- {pretty(m)}; {pretty(b)}"
        case If(cond=c, then=t, orelse=f):
            return f"if {pretty(c)} then {{{pretty(t)}}} else {{{pretty(f)}}}"
        case Assert(cond=c):
            return f"assert {pretty(c)}"
        case Seq(first=a, rest=b):
            return f"{pretty(a)}; {pretty(b)}"
        case Abort(message=m):
            return f"abort {m!r}"
        case Loop(init=i, var=v, cond=c, body=b):
            return f"loop {v.name} = {pretty(i)} while {pretty(c)} do {{{pretty(b)}}}"
        case Not(a=a):
            return f"!{pretty(a)}"
        case Neg(a=a):
            return f"-{pretty(a)}"
    op = getattr(e, "op", None)
    if op is not None:
        return f"({pretty(e.a)} {op} {pretty(e.b)})"
    if isinstance(e, And):
        word = "or" if isinstance(e, Or) else "and"
        return f"({pretty(e.a)} {word} {pretty(e.b)})"
    name = type(e).__name__.lower()
    args = ", ".join(pretty(c) for c in e.children())
    return f"{name}({args})"


# ---------------------------------------------------------------------------
# Smart constructors


def lit(v, ty: Type | None = None) -> Lit:
    if isinstance(v, Expr):
        return v
    return Lit(v, ty if ty is not None else type_of_value(v))


def real(v) -> Lit:
    return Lit(float(v), REAL)


def _e(x) -> Expr:
    return x if isinstance(x, Expr) else lit(x)


def _pair_numeric(a, b):
    a, b = _e(a), _e(b)
    if a.type == REAL and b.type == INT and isinstance(b, Lit):
        b = real(b.value)
    if b.type == REAL and a.type == INT and isinstance(a, Lit):
        a = real(a.value)
    return a, b


def lt(a, b) -> Expr:
    return Lt(*_pair_numeric(a, b))


def le(a, b) -> Expr:
    return Le(*_pair_numeric(a, b))


def gt(a, b) -> Expr:
    a, b = _pair_numeric(a, b)
    return Lt(b, a)


def ge(a, b) -> Expr:
    a, b = _pair_numeric(a, b)
    return Le(b, a)


def eq(a, b) -> Expr:
    return Eq(*_pair_numeric(a, b))


def not_(a) -> Expr:
    return Not(_e(a))


def and_(*xs) -> Expr:
    xs = [_e(x) for x in xs]
    out = xs[0]
    for x in xs[1:]:
        out = And(out, x)
    return out


def or_(*xs) -> Expr:
    xs = [_e(x) for x in xs]
    out = xs[0]
    for x in xs[1:]:
        out = Or(out, x)
    return out


def ret(a) -> Return:
    return Return(_e(a))


def lap(center, width: float) -> Laplace:
    return Laplace(_e(center) if not isinstance(center, (int, float)) else real(center), width)


def bind(m: Expr, k: Callable[[Var], Expr], name: str = "x") -> Bind:
    inner = _expect_dist(m, m.type)
    v = Var(fresh_name(name), inner)
    return Bind(m, v, k(v))


def if_(cond, then: Expr, orelse: Expr) -> If:
    return If(_e(cond), then, orelse)


def assert_(cond) -> Assert:
    return Assert(_e(cond))


def seq(*steps: Expr) -> Expr:
    out = steps[-1]
    for s in reversed(steps[:-1]):
        out = Seq(s, out)
    return out


def abort(message: str, ty: Type) -> Abort:
    return Abort(message, ty)


def loop(init, cond: Callable[[Var], Expr], body: Callable[[Var], Expr],
         metric: Callable[[Var], Expr] | None = None, label: str = "loop") -> Loop:
    init = _e(init)
    v = Var(fresh_name("st"), init.type)
    return Loop(init, v, cond(v), body(v), metric(v) if metric else None, label)


def pair(a, b) -> Pair:
    return Pair(_e(a), _e(b))


def fst(p) -> Fst:
    return Fst(p)


def snd(p) -> Snd:
    return Snd(p)


def nil(elem: Type) -> Nil:
    return Nil(elem)


def cons(h, t) -> Cons:
    return Cons(_e(h), t)


def snoc(t, x) -> Snoc:
    return Snoc(t, _e(x))


def list_of(items: Iterable, elem: Type) -> Expr:
    out: Expr = Nil(elem)
    for x in items:
        out = Snoc(out, _e(x))
    return out


def just(a) -> JustE:
    return JustE(_e(a))


def nothing(elem: Type) -> NothingE:
    return NothingE(elem)


def to_real(a) -> ToReal:
    return ToReal(_e(a))


def map_laplace(xs: Iterable, width: float, k: Callable[[list[Var]], Expr],
                name: str = "n") -> Expr:
    """Sample ``lap(x, width)`` for every x in order, then continue with ``k``."""
    xs = list(xs)

    def go(i: int, acc: list[Var]) -> Expr:
        if i == len(xs):
            return k(acc)
        return bind(lap(xs[i], width), lambda v: go(i + 1, acc + [v]), name)

    return go(0, [])


def fold_dist(init: Expr, items: Iterable, step: Callable[[Var, Any], Expr],
              name: str = "acc") -> Expr:
    """Thread a distribution-level accumulator through ``items``.

    Produces ``acc0 <- init; acc1 <- step(acc0, items[0]); ...``, leaving each
    step's branches joined before the next one starts.
    """
    prog = init
    for item in items:
        prog = bind(prog, lambda acc, item=item: step(acc, item), name)
    return prog
