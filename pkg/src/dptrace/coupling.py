"""Per-bucket coupling formulas: shift variables, dual samples, costs.

For a bucket of traces drawn on input x1 and the symbolic paths of the
program on x2, the formula asks for one shift per call position such that
every trace, with its samples moved by the shifts, follows some matched
path, reproduces the trace's output and pays a total cost of at most
epsilon.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple

from . import terms as T
from .bucketing import PathMatch, key_of, value_at
from .concrete import RunOutcome, SampleInfo, instrumented_run, replay_sampler, strip
from .errors import ArityMismatch, WidthMismatch
from .terms import Const, Named, mk


def shift_var(j: int) -> Named:
    return Named(f"sh{j}")


def dual_var(t: int, j: int) -> Named:
    return Named(f"x{t}_{j}")


class Coupled(NamedTuple):
    sample: Any  # term defining the dual sample
    offset: Any  # c1 + shift - c2, whose |.|/width is the cost
    width: float

    @property
    def cost(self):
        return mk("/", mk("abs", self.offset), T.const(self.width))


def couple_sample(entry: SampleInfo, center2, shift: Named, width: float) -> Coupled:
    """Couple one recorded sample with the matching call of the dual run."""
    if float(entry.width) != float(width):
        raise WidthMismatch(f"recorded width {entry.width} != symbolic width {width}")
    c1 = Fraction(entry.center)
    if isinstance(center2, Const):
        d = c1 - center2.value
        offset = shift if d == 0 else mk("+", shift, T.const(d))
    else:
        offset = mk("-", mk("+", T.const(c1), shift), center2)
    return Coupled(mk("+", T.const(entry.sample), shift), offset, width)


@dataclass(frozen=True)
class Disjunct:
    constraints: tuple
    costs: tuple  # ((offset term, width), ...)


@dataclass
class CouplingFormula:
    epsilon: Fraction
    shifts: tuple
    defs: tuple  # ((Named, term), ...)
    per_trace: tuple  # one tuple of Disjuncts per trace
    unsat_reason: str | None = None
    dropped: Counter = field(default_factory=Counter)

    @property
    def unsatisfiable_by_construction(self) -> bool:
        return self.unsat_reason is not None


def build_bucket_formula(key, runs: list[RunOutcome], matches: list[PathMatch],
                         epsilon) -> CouplingFormula:
    """Coupling formula for one bucket (see module docstring)."""
    eps = Fraction(epsilon)
    width = max((len(r.trace) for r in runs), default=0)
    shifts = tuple(shift_var(j) for j in range(width))
    defs, per_trace = [], []
    dropped: Counter = Counter()
    unsat = None
    for t, run in enumerate(runs):
        names = [dual_var(t, j) for j in range(len(run.trace))]
        coupled_cache: dict = {}
        disjuncts = []
        for m in matches:
            try:
                coupled = _couple_path(run, m, names, coupled_cache)
            except ArityMismatch:
                dropped["arity"] += 1
                continue
            except WidthMismatch:
                dropped["width"] += 1
                continue
            sub = _substitution(names)
            pc = T.substitute(m.path.path_condition, sub)
            costs = tuple((c.offset, c.width) for c in coupled)
            for case in m.cases:
                cs = [pc] + [T.substitute(g, sub) for g in case.guards]
                for term, pos in case.eqs:
                    want = T.const(value_at(run.output, pos), T.REAL)
                    cs.append(mk("=", T.substitute(term, sub), want))
                disjuncts.append(Disjunct(tuple(cs), costs))
        if not disjuncts and unsat is None:
            unsat = f"trace {t} cannot follow any matched path"
        for j, name in enumerate(names):
            defs.append((name, mk("+", T.const(run.trace[j].sample), shifts[j])))
        per_trace.append(tuple(disjuncts))
    return CouplingFormula(eps, shifts, tuple(defs), tuple(per_trace), unsat, dropped)


def _substitution(names):
    return lambda v: names[v.index]


def _couple_path(run: RunOutcome, m: PathMatch, names, cache) -> list[Coupled]:
    samples = m.path.samples
    if len(samples) != len(run.trace):
        raise ArityMismatch(f"trace has {len(run.trace)} calls, path has {len(samples)}")
    sub = _substitution(names)
    out = []
    for j, (entry, s) in enumerate(zip(run.trace, samples)):
        center2 = T.substitute(s.center, sub)
        ck = (j, center2, s.width)
        if ck not in cache:
            cache[ck] = couple_sample(entry, center2, shift_var(j), s.width)
        out.append(cache[ck])
    return out


# ---------------------------------------------------------------------------
# SMT-LIB emission


def _var(i):  # free sample variables never survive substitution
    raise ValueError(f"unsubstituted sample s{i}")


def smt(t) -> str:
    return T.to_smt(t, _var)


def _logic(terms) -> str:
    ints = any(T.has_int(t) for t in terms)
    linear = all(T.is_linear(t) for t in terms)
    return "QF_" + ("L" if linear else "N") + ("IRA" if ints else "RA")


def emit_smtlib(f: CouplingFormula) -> str:
    """Deterministic SMT-LIB2 script for a coupling formula."""
    if f.unsatisfiable_by_construction:
        lines = ["(set-logic QF_LRA)"]
        lines += [f"(declare-fun {s.name} () Real)" for s in f.shifts]
        lines += [f"; {f.unsat_reason}", "(assert false)", "(check-sat)"]
        return "\n".join(lines) + "\n"

    aux: dict[str, str] = {}
    aux_lines: list[str] = []

    def cost_sum(costs) -> str:
        parts = []
        for offset, width in costs:
            e = smt(offset)
            name = aux.get(e)
            if name is None:
                name = aux[e] = f"a{len(aux)}"
                aux_lines.append(f"(declare-fun {name} () Real)")
                aux_lines.append(f"(assert (>= {name} {e}))")
                aux_lines.append(f"(assert (>= {name} (- {e})))")
            inv = 1 / Fraction(width)
            parts.append(name if inv == 1 else f"(* {T.decimal(inv)} {name})")
        if not parts:
            return "0.0"
        return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"

    bound = T.decimal(f.epsilon)
    all_costs = {d.costs for ds in f.per_trace for d in ds}
    hoist = len(all_costs) == 1
    body = []
    everything = [t for _, t in f.defs]
    for ds in f.per_trace:
        options = []
        for d in ds:
            everything.extend(d.constraints)
            everything.extend(o for o, _ in d.costs)
            parts = [smt(c) for c in d.constraints if not (isinstance(c, Const) and c.value)]
            if not hoist:
                parts.append(f"(<= {cost_sum(d.costs)} {bound})")
            if not parts:
                options.append("true")
            elif len(parts) == 1:
                options.append(parts[0])
            else:
                options.append("(and " + " ".join(parts) + ")")
        options = list(dict.fromkeys(options))
        if "true" in options:
            continue
        body.append(options[0] if len(options) == 1 else "(or " + " ".join(options) + ")")
    if hoist:
        (costs,) = all_costs
        body.append(f"(<= {cost_sum(costs)} {bound})")

    lines = [f"(set-logic {_logic(everything)})"]
    lines += [f"(declare-fun {s.name} () Real)" for s in f.shifts]
    lines += [f"(define-fun {n.name} () Real {smt(t)})" for n, t in f.defs]
    lines += aux_lines
    lines += [f"(assert {b})" for b in body]
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Witness replay


@dataclass
class ReplayResult:
    ok: bool
    max_cost: Fraction
    failures: list


def coupling_cost(trace1, trace2, shifts) -> Fraction:
    total = Fraction(0)
    for j, (a, b) in enumerate(zip(trace1, trace2)):
        sh = Fraction(shifts.get(j, 0))
        total += abs(Fraction(a.center) + sh - Fraction(b.center)) / Fraction(a.width)
    return total


def replay_witness(prog2, key, runs: list[RunOutcome], shifts: dict, epsilon,
                   tol: float = 1e-9) -> ReplayResult:
    """Re-run ``prog2`` exactly on shifted samples of every trace in a bucket.

    ``shifts`` maps call position to an exact rational.  Each replay must
    produce the bucket key and the trace's own output, use the same number
    of Laplace calls, and cost at most epsilon (+ tol).
    """
    failures, worst = [], Fraction(0)
    for t, run in enumerate(runs):
        samples = [Fraction(s.sample) + Fraction(shifts.get(j, 0))
                   for j, s in enumerate(run.trace)]
        dual = instrumented_run(prog2, sampler=replay_sampler(samples), exact=True)
        if dual.aborted:
            failures.append((t, "aborted"))
            continue
        if len(dual.trace) != len(run.trace):
            failures.append((t, "call count"))
            continue
        if key_of(dual.raw_output) != key:
            failures.append((t, "key"))
            continue
        if strip(dual.output) != run.output:
            failures.append((t, "output"))
            continue
        cost = coupling_cost(run.trace, dual.trace, shifts)
        worst = max(worst, cost)
        if cost > Fraction(epsilon) + Fraction(tol):
            failures.append((t, f"cost {float(cost)}"))
    return ReplayResult(not failures, worst, failures)
