"""Concrete evaluation with discretized Laplace sampling and instrumentation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, NamedTuple

import numpy as np

from . import dsl as D
from .dsl import NOTHING, Just, MapV, PairV
from .errors import AbortEncountered, EvalError, FuelExhausted, InvalidWidth

OMEGA = 2.0 ** -20
DEFAULT_FUEL = 10 ** 6


# ---------------------------------------------------------------------------
# Sampling


def alpha_for(width: float, omega: float = OMEGA) -> float:
    return math.exp(-omega / width)


def discrete_laplace_pmf(k: int, width: float, omega: float = OMEGA) -> float:
    """P(center + k*omega) under the two-sided geometric distribution."""
    if not width > 0:
        raise InvalidWidth(width)
    a = alpha_for(width, omega)
    # (1 - a) / (1 + a) * a**|k|, written to keep precision when a ~ 1
    return -math.expm1(-omega / width) / (1.0 + a) * a ** abs(k)


def sample_discrete_laplace(center, width: float, rng: np.random.Generator,
                            omega: float = OMEGA):
    """Draw ``center + k*omega`` with P(k) proportional to exp(-omega/width)**|k|.

    The difference of two i.i.d. geometric variables is two-sided geometric.
    """
    if not width > 0:
        raise InvalidWidth(width)
    p = -math.expm1(-omega / width)
    k = int(rng.geometric(p)) - int(rng.geometric(p))
    return center + k * omega


def run_rng(master_seed: int, *counter: int) -> np.random.Generator:
    """Counter-based stream: Philox keyed by the master seed.

    Each counter tuple addresses a disjoint block of 2**64 Philox outputs.
    """
    words = [0, 0, 0, 0]
    for i, c in enumerate(counter[:3]):
        words[i + 1] = int(c) & (2 ** 64 - 1)
    bg = np.random.Philox(key=int(master_seed) & (2 ** 128 - 1), counter=words)
    return np.random.Generator(bg)


# ---------------------------------------------------------------------------
# Provenance


@dataclass(frozen=True)
class PConst:
    def __str__(self):
        return "c"


@dataclass(frozen=True)
class PLap:
    center: Any
    width: float
    index: int

    def __str__(self):
        return f"Lap({self.center}, {self.width})^{self.index}"


@dataclass(frozen=True)
class POp:
    op: str
    args: tuple

    def __str__(self):
        return f"({f' {self.op} '.join(map(str, self.args))})" if len(self.args) > 1 \
            else f"{self.op}{self.args[0]}"


CONST = PConst()


@dataclass(frozen=True)
class Tracked:
    """A real that depends on samples, paired with its provenance."""

    value: Any
    prov: Any


def untrack(v):
    return v.value if isinstance(v, Tracked) else v


def prov_of(v):
    return v.prov if isinstance(v, Tracked) else CONST


def strip(v):
    """Drop provenance from every leaf of a value."""
    if isinstance(v, Tracked):
        return v.value
    if isinstance(v, tuple):
        return tuple(strip(x) for x in v)
    if isinstance(v, PairV):
        return PairV(strip(v.fst), strip(v.snd))
    if isinstance(v, Just):
        return Just(strip(v.value))
    if isinstance(v, MapV):
        return MapV(tuple((strip(k), strip(x)) for k, x in v.items))
    return v


def has_tracked(v) -> bool:
    if isinstance(v, Tracked):
        return True
    if isinstance(v, tuple):
        return any(has_tracked(x) for x in v)
    if isinstance(v, PairV):
        return has_tracked(v.fst) or has_tracked(v.snd)
    if isinstance(v, Just):
        return has_tracked(v.value)
    if isinstance(v, MapV):
        return any(has_tracked(k) or has_tracked(x) for k, x in v.items)
    return False


# ---------------------------------------------------------------------------
# Run records


class SampleInfo(NamedTuple):
    sample: Any
    center: Any
    width: float


Trace = list  # list[SampleInfo]


@dataclass
class RunOutcome:
    output: Any
    trace: list
    output_provenance: Any = None
    aborted: bool = False
    message: str = ""
    loop_metrics: dict = field(default_factory=dict)
    raw_output: Any = None  # output with provenance leaves left in place


# ---------------------------------------------------------------------------
# Interpreter


def _arith(op: str, fn, a, b):
    if isinstance(a, Tracked) or isinstance(b, Tracked):
        return Tracked(fn(untrack(a), untrack(b)), POp(op, (prov_of(a), prov_of(b))))
    return fn(a, b)


def _int_mod(a, b):
    return a % b


class Interpreter:
    """Single-run evaluator.

    ``sampler(center, width, index)`` supplies sample values; ``exact``
    switches real literals to Fractions so that replays are exact.
    """

    def __init__(self, sampler: Callable, *, fuel: int = DEFAULT_FUEL,
                 track: bool = True, exact: bool = False):
        self.sampler = sampler
        self.fuel = fuel
        self.track = track
        self.exact = exact
        self.trace: list[SampleInfo] = []
        self.loop_metrics: dict[str, list] = {}
        self.env: dict[str, Any] = {}

    # pure expressions -----------------------------------------------------
    def pure(self, e: D.Expr):
        t = type(e)
        if t is D.Var:
            return self.env[e.name]
        if t is D.Lit:
            v = e.value
            if e.ty == D.REAL:
                return Fraction(v) if self.exact else float(v)
            if self.exact:
                return _exactify(v)
            return v
        if t is D.Add:
            return _arith("+", lambda x, y: x + y, self.pure(e.a), self.pure(e.b))
        if t is D.Sub:
            return _arith("-", lambda x, y: x - y, self.pure(e.a), self.pure(e.b))
        if t is D.Mul:
            return _arith("*", lambda x, y: x * y, self.pure(e.a), self.pure(e.b))
        if t is D.Div:
            return _arith("/", _div, self.pure(e.a), self.pure(e.b))
        if t is D.Mod:
            return _int_mod(self.pure(e.a), self.pure(e.b))
        if t is D.Neg:
            a = self.pure(e.a)
            if isinstance(a, Tracked):
                return Tracked(-a.value, POp("neg", (a.prov,)))
            return -a
        if t is D.ToReal:
            a = self.pure(e.a)
            return Fraction(a) if self.exact else float(a)
        if t is D.Lt:
            return untrack(self.pure(e.a)) < untrack(self.pure(e.b))
        if t is D.Le:
            return untrack(self.pure(e.a)) <= untrack(self.pure(e.b))
        if t is D.Eq:
            return untrack(self.pure(e.a)) == untrack(self.pure(e.b))
        if t is D.Not:
            return not self.pure(e.a)
        if t is D.And:
            return self.pure(e.a) and self.pure(e.b)
        if t is D.Or:
            return self.pure(e.a) or self.pure(e.b)
        if t is D.Pair:
            return PairV(self.pure(e.a), self.pure(e.b))
        if t is D.Fst:
            return self.pure(e.p).fst
        if t is D.Snd:
            return self.pure(e.p).snd
        if t is D.Nil:
            return ()
        if t is D.Cons:
            return (self.pure(e.head),) + self.pure(e.tail)
        if t is D.Snoc:
            return self.pure(e.init) + (self.pure(e.last),)
        if t is D.Uncons:
            xs = self.pure(e.lst)
            return Just(PairV(xs[0], xs[1:])) if xs else NOTHING
        if t is D.IsNil:
            return len(self.pure(e.lst)) == 0
        if t is D.Length:
            return len(self.pure(e.lst))
        if t is D.MapEmpty:
            return MapV()
        if t is D.MapInsert:
            return self.pure(e.m).insert(_key(self.pure(e.k)), self.pure(e.v))
        if t is D.MapLookup:
            return self.pure(e.m).lookup(_key(self.pure(e.k)))
        if t is D.MapSize:
            return len(self.pure(e.m).items)
        if t is D.JustE:
            return Just(self.pure(e.a))
        if t is D.NothingE:
            return NOTHING
        if t is D.IsJust:
            return isinstance(self.pure(e.m), Just)
        if t is D.FromJust:
            m = self.pure(e.m)
            if not isinstance(m, Just):
                raise EvalError("fromJust applied to nothing")
            return m.value
        raise EvalError(f"not a pure expression: {type(e).__name__}")

    # distribution expressions --------------------------------------------
    def run(self, e: D.Expr):
        t = type(e)
        if t is D.Return:
            return self.pure(e.a)
        if t is D.Bind:
            v = self.run(e.m)
            self.env[e.var.name] = v
            return self.run(e.body)
        if t is D.Laplace:
            c = self.pure(e.center)
            index = len(self.trace)
            s = self.sampler(untrack(c), e.width, index)
            self.trace.append(SampleInfo(s, untrack(c), e.width))
            if self.track:
                return Tracked(s, PLap(prov_of(c), e.width, index))
            return s
        if t is D.If:
            return self.run(e.then if self.pure(e.cond) else e.orelse)
        if t is D.Seq:
            self.run(e.first)
            return self.run(e.rest)
        if t is D.Assert:
            if not self.pure(e.cond):
                raise EvalError("assertion failed")
            return ()
        if t is D.Abort:
            raise AbortEncountered(e.message)
        if t is D.Loop:
            return self._loop(e)
        raise EvalError(f"not a distribution expression: {type(e).__name__}")

    def _loop(self, e: D.Loop):
        state = self.pure(e.init)
        metrics = None
        if e.metric is not None:
            # one metric sequence per loop invocation
            metrics = []
            self.loop_metrics.setdefault(e.label, []).append(metrics)
        while True:
            self.env[e.var.name] = state
            if metrics is not None:
                metrics.append(strip(self.pure(e.metric)))
            if not self.pure(e.cond):
                return state
            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhausted("loop iteration budget exhausted")
            state = self.run(e.body)


def _div(x, y):
    return x / y


def _key(k):
    return strip(k)


def _exactify(v):
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, tuple):
        return tuple(_exactify(x) for x in v)
    if isinstance(v, PairV):
        return PairV(_exactify(v.fst), _exactify(v.snd))
    return v


# ---------------------------------------------------------------------------
# Entry points


def rng_sampler(rng: np.random.Generator, omega: float = OMEGA):
    def draw(center, width, index):
        return sample_discrete_laplace(center, width, rng, omega)
    return draw


def evaluate(e: D.Expr, rng: np.random.Generator, *, fuel: int = DEFAULT_FUEL,
             omega: float = OMEGA):
    """Draw one output of a distribution expression."""
    interp = Interpreter(rng_sampler(rng, omega), fuel=fuel, track=False)
    return interp.run(e)


def instrumented_run(e: D.Expr, seed: int | np.random.Generator | None = None, *,
                     sampler: Callable | None = None, fuel: int = DEFAULT_FUEL,
                     omega: float = OMEGA, exact: bool = False) -> RunOutcome:
    """Run once, recording every Laplace call and the output's provenance.

    ``sampler`` overrides random sampling (used for noise injection and
    replay); otherwise ``seed`` picks the random stream.
    """
    if sampler is None:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        sampler = rng_sampler(rng, omega)
    interp = Interpreter(sampler, fuel=fuel, track=True, exact=exact)
    try:
        raw = interp.run(e)
    except AbortEncountered as exc:
        return RunOutcome(None, interp.trace, None, True, exc.message,
                          interp.loop_metrics)
    out = strip(raw)
    return RunOutcome(out, interp.trace, raw if has_tracked(raw) else None,
                      False, "", interp.loop_metrics, raw)


def instrumented_runs(e: D.Expr, n: int, master_seed: int, *stream: int,
                      omega: float = OMEGA, fuel: int = DEFAULT_FUEL) -> list[RunOutcome]:
    """``n`` independent runs, run i drawing from counter (*stream, i)."""
    out = []
    for i in range(n):
        rng = run_rng(master_seed, *stream, i)
        out.append(instrumented_run(e, rng, omega=omega, fuel=fuel))
    return out


def injected(noise) -> Callable:
    """Sampler returning ``center + noise[i]`` for the i-th call."""
    noise = list(noise)

    def draw(center, width, index):
        return center + noise[index]
    return draw


def replay_sampler(samples) -> Callable:
    """Sampler returning fixed sample values in call order."""
    samples = list(samples)

    def draw(center, width, index):
        if index >= len(samples):
            raise EvalError("replay ran out of samples")
        return samples[index]
    return draw
