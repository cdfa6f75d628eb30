"""Symbolic terms over sample variables, with constant folding and SMT-LIB output."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

REAL, INT, BOOL = "Real", "Int", "Bool"


@dataclass(frozen=True, slots=True)
class SVar:
    """The sample drawn by the ``index``-th Laplace call on a path."""

    index: int
    sort: str = REAL

    def __str__(self):
        return f"s{self.index}"


@dataclass(frozen=True, slots=True)
class Named:
    """A solver-level variable (shift, dual sample) referred to by name."""

    name: str
    sort: str = REAL

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: object
    sort: str

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class App:
    op: str
    args: tuple
    sort: str

    def __str__(self):
        if self.op == "ite":
            c, a, b = self.args
            return f"ite({c}, {a}, {b})"
        if len(self.args) == 1:
            return f"{self.op}({self.args[0]})"
        return "(" + f" {self.op} ".join(map(str, self.args)) + ")"


Term = SVar | Named | Const | App

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


def const(v, sort: str | None = None) -> Const:
    if sort is None:
        if isinstance(v, bool):
            sort = BOOL
        elif isinstance(v, int):
            sort = INT
        else:
            sort = REAL
    if sort == REAL:
        v = Fraction(v)
    elif sort == INT:
        v = int(v)
    else:
        v = bool(v)
    return Const(v, sort)


def is_const(t) -> bool:
    return isinstance(t, Const)


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: Fraction(a) / Fraction(b),
    "mod": lambda a, b: a % b,
}
_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
}


def _sort(op: str, args) -> str:
    if op in _CMP or op in ("not", "and", "or"):
        return BOOL
    if op in ("/", "to_real"):
        return REAL
    if op == "ite":
        return args[1].sort
    return args[0].sort


def mk(op: str, *args: Term) -> Term:
    """Build ``op(args)``, folding constants.

    Real arithmetic is only folded when every operand is constant, so that
    the structure of sample-dependent terms mirrors the program text.
    """
    if op == "not":
        (a,) = args
        if isinstance(a, Const):
            return Const(not a.value, BOOL)
        if isinstance(a, App) and a.op == "not":
            return a.args[0]
        return App("not", (a,), BOOL)
    if op in ("and", "or"):
        unit, zero = (True, False) if op == "and" else (False, True)
        flat = []
        for a in args:
            if isinstance(a, Const):
                if a.value == zero:
                    return Const(zero, BOOL)
                continue
            if isinstance(a, App) and a.op == op:
                flat.extend(a.args)
            else:
                flat.append(a)
        if not flat:
            return Const(unit, BOOL)
        seen = set(flat)
        if any(isinstance(a, App) and a.op == "not" and a.args[0] in seen for a in flat):
            return Const(zero, BOOL)
        flat = list(dict.fromkeys(flat))
        if len(flat) == 1:
            return flat[0]
        return App(op, tuple(flat), BOOL)
    if op == "ite":
        c, a, b = args
        if isinstance(c, Const):
            return a if c.value else b
        if a == b:
            return a
        if a.sort == BOOL and isinstance(a, Const) and isinstance(b, Const):
            return c if a.value else mk("not", c)
        return App("ite", (c, a, b), a.sort)
    if all(isinstance(a, Const) for a in args):
        vals = [a.value for a in args]
        if op in _ARITH:
            return const(_ARITH[op](*vals), _sort(op, args))
        if op in _CMP:
            return Const(bool(_CMP[op](*vals)), BOOL)
        if op == "neg":
            return const(-vals[0], args[0].sort)
        if op == "abs":
            return const(abs(vals[0]), args[0].sort)
        if op == "to_real":
            return const(Fraction(vals[0]), REAL)
        raise ValueError(f"unknown operator {op}")
    # push an operator into an ite whose branches (and other operands) are
    # constants, e.g. ite(c, 0, 1) <= 0  ~>  c
    if op in _CMP or op in _ARITH or op in ("neg", "to_real"):
        for i, a in enumerate(args):
            if (isinstance(a, App) and a.op == "ite"
                    and isinstance(a.args[1], Const) and isinstance(a.args[2], Const)
                    and all(isinstance(x, Const) for j, x in enumerate(args) if j != i)):
                left = mk(op, *args[:i], a.args[1], *args[i + 1:])
                right = mk(op, *args[:i], a.args[2], *args[i + 1:])
                return mk("ite", a.args[0], left, right)
    return App(op, tuple(args), _sort(op, args))


def conj(items: Iterable[Term]) -> Term:
    return mk("and", *items)


def disj(items: Iterable[Term]) -> Term:
    return mk("or", *items)


def ite(c, a, b) -> Term:
    return mk("ite", c, a, b)


def free_vars(t: Term, acc: set | None = None) -> set:
    """Sample indices and solver-variable names occurring in ``t``."""
    acc = set() if acc is None else acc
    if isinstance(t, SVar):
        acc.add(t.index)
    elif isinstance(t, Named):
        acc.add(t.name)
    elif isinstance(t, App):
        for a in t.args:
            free_vars(a, acc)
    return acc


def evaluate(t: Term, samples) -> object:
    """Exact value of ``t`` with ``samples[j]`` substituted for s_j."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, SVar):
        return Fraction(samples[t.index])
    if isinstance(t, Named):
        return samples[t.name]
    op, args = t.op, t.args
    if op == "ite":
        return evaluate(args[1] if evaluate(args[0], samples) else args[2], samples)
    if op == "and":
        return all(evaluate(a, samples) for a in args)
    if op == "or":
        return any(evaluate(a, samples) for a in args)
    vals = [evaluate(a, samples) for a in args]
    if op in _ARITH:
        return _ARITH[op](*vals)
    if op in _CMP:
        return _CMP[op](*vals)
    if op == "not":
        return not vals[0]
    if op == "neg":
        return -vals[0]
    if op == "abs":
        return abs(vals[0])
    if op == "to_real":
        return Fraction(vals[0])
    raise ValueError(f"unknown operator {op}")


def substitute(t: Term, f: Callable[[SVar], Term]) -> Term:
    if isinstance(t, SVar):
        return f(t)
    if isinstance(t, App):
        return App(t.op, tuple(substitute(a, f) for a in t.args), t.sort)
    return t


def depends_on_samples(t: Term) -> bool:
    """True when the term's value (not merely a guard) mentions a sample."""
    if isinstance(t, SVar):
        return True
    if isinstance(t, App):
        if t.op == "ite":
            return depends_on_samples(t.args[1]) or depends_on_samples(t.args[2])
        if t.sort != REAL:
            return False
        return any(depends_on_samples(a) for a in t.args)
    return False


def is_linear(t: Term) -> bool:
    if isinstance(t, App):
        if t.op == "*" and sum(not _ground(a) for a in t.args) > 1:
            return False
        if t.op == "/" and not _ground(t.args[1]):
            return False
        if t.op == "mod" and not all(_ground(a) for a in t.args):
            return False
        return all(is_linear(a) for a in t.args)
    return True


def _ground(t: Term) -> bool:
    return not free_vars(t)


def has_int(t: Term) -> bool:
    if t.sort == INT:
        return True
    return isinstance(t, App) and any(has_int(a) for a in t.args)


# ---------------------------------------------------------------------------
# SMT-LIB rendering


def decimal(q) -> str:
    """Exact SMT-LIB rendering of a rational."""
    q = Fraction(q)
    neg = q < 0
    q = abs(q)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = q.numerator * (10 ** digits) // q.denominator
        s = str(scaled).rjust(digits + 1, "0")
        text = (s[:-digits] + "." + s[-digits:]) if digits else s + ".0"
    else:
        text = f"(/ {q.numerator}.0 {q.denominator}.0)"
    return f"(- {text})" if neg else text


def int_lit(n: int) -> str:
    return f"(- {-n})" if n < 0 else str(n)


_SMT_OP = {"+": "+", "-": "-", "*": "*", "/": "/", "mod": "mod", "<": "<",
           "<=": "<=", "=": "=", "not": "not", "and": "and", "or": "or",
           "ite": "ite", "neg": "-", "to_real": "to_real"}


def to_smt(t: Term, var: Callable[[int], str]) -> str:
    if isinstance(t, Const):
        if t.sort == BOOL:
            return "true" if t.value else "false"
        if t.sort == INT:
            return int_lit(t.value)
        return decimal(t.value)
    if isinstance(t, SVar):
        return var(t.index)
    if isinstance(t, Named):
        return t.name
    if t.op == "abs":
        x = to_smt(t.args[0], var)
        zero = "0" if t.sort == INT else "0.0"
        return f"(ite (< {x} {zero}) (- {x}) {x})"
    return "(" + _SMT_OP[t.op] + " " + " ".join(to_smt(a, var) for a in t.args) + ")"
