"""Grouping of instrumented runs by output key, and matching keys to paths."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, NamedTuple

from . import terms as T
from .concrete import PConst, PLap, POp, RunOutcome, Tracked
from .dsl import NOTHING, Just, MapV, PairV
from .errors import NoMatchingPath
from .symbolic import PathResult, Union
from .terms import App, Const, SVar, mk


@dataclass(frozen=True)
class Shape:
    """Key leaf standing for every sampled real with this provenance shape."""

    tree: tuple

    def __str__(self):
        return _shape_str(self.tree)


def _shape_str(t) -> str:
    if t[0] == "const":
        return "c"
    if t[0] == "lap":
        return f"Lap({_shape_str(t[1])}, {t[2]})^{t[3]}"
    args = [_shape_str(a) for a in t[2:]]
    return f"({f' {t[1]} '.join(args)})" if len(args) > 1 else f"{t[1]}{args[0]}"


def prov_shape(p) -> tuple:
    if isinstance(p, PLap):
        return ("lap", prov_shape(p.center), p.width, p.index)
    if isinstance(p, POp):
        return ("op", p.op) + tuple(prov_shape(a) for a in p.args)
    if isinstance(p, PConst):
        return ("const",)
    raise TypeError(f"not a provenance node: {p!r}")


def key_of(raw) -> Any:
    """Bucket key of an output that may carry provenance leaves.

    Sampled reals become their provenance Shape; every other leaf, and all
    constructors, are kept exactly.
    """
    if isinstance(raw, Tracked):
        return Shape(prov_shape(raw.prov))
    if isinstance(raw, tuple):
        return tuple(key_of(x) for x in raw)
    if isinstance(raw, PairV):
        return PairV(key_of(raw.fst), key_of(raw.snd))
    if isinstance(raw, Just):
        return Just(key_of(raw.value))
    if isinstance(raw, MapV):
        return MapV(tuple((k, key_of(v)) for k, v in raw.items))
    return raw


def is_exact(key) -> bool:
    if isinstance(key, Shape):
        return False
    if isinstance(key, tuple):
        return all(is_exact(x) for x in key)
    if isinstance(key, PairV):
        return is_exact(key.fst) and is_exact(key.snd)
    if isinstance(key, Just):
        return is_exact(key.value)
    if isinstance(key, MapV):
        return all(is_exact(v) for _, v in key.items)
    return True


def bucket(runs: list[RunOutcome]) -> dict:
    """Map each key to the runs producing it, in order of first appearance."""
    out: dict[Any, list[RunOutcome]] = {}
    for r in runs:
        if r.aborted:
            continue
        out.setdefault(key_of(r.raw_output), []).append(r)
    return out


def value_at(v, pos: tuple):
    for step in pos:
        if step == "fst":
            v = v.fst
        elif step == "snd":
            v = v.snd
        elif step == "just":
            v = v.value
        elif step[0] == "i":
            v = v[step[1]]
        else:
            v = dict(v.items)[step[1]]
    return v


# ---------------------------------------------------------------------------
# Matching


class Case(NamedTuple):
    guards: tuple  # boolean terms over the path's samples
    eqs: tuple  # (term, position): term must equal the trace's output there


@dataclass(frozen=True)
class PathMatch:
    path: PathResult
    cases: tuple


def ite_cases(t) -> list:
    """Split value-level ``ite`` nodes of a real term into guarded pieces."""
    if isinstance(t, App):
        if t.op == "ite":
            c, a, b = t.args
            return ([((c,) + g, x) for g, x in ite_cases(a)]
                    + [((mk("not", c),) + g, x) for g, x in ite_cases(b)])
        if t.sort == T.REAL and t.op in ("+", "-", "*", "/", "neg"):
            out = []
            for combo in product(*(ite_cases(a) for a in t.args)):
                gs = tuple(g for part in combo for g in part[0])
                out.append((gs, mk(t.op, *(part[1] for part in combo))))
            return out
    return [((), t)]


def shape_cases(t, samples) -> list:
    """``(guards, shape)`` pairs for a real term on a path's samples."""
    if isinstance(t, Const):
        return [((), ("const",))]
    if isinstance(t, SVar):
        s = samples[t.index]
        return [(g, ("lap", sh, s.width, t.index)) for g, sh in shape_cases(s.center, samples)]
    if isinstance(t, App):
        if t.op == "ite":
            c, a, b = t.args
            return ([((c,) + g, sh) for g, sh in shape_cases(a, samples)]
                    + [((mk("not", c),) + g, sh) for g, sh in shape_cases(b, samples)])
        if t.op in ("+", "-", "*", "/", "neg"):
            out = []
            for combo in product(*(shape_cases(a, samples) for a in t.args)):
                gs = tuple(g for part in combo for g in part[0])
                out.append((gs, ("op", t.op) + tuple(part[1] for part in combo)))
            return out
        if not T.depends_on_samples(t):
            return [((), ("const",))]
    return []


def _match(key, v, samples, pos: tuple) -> list:
    """All cases under which symbolic value ``v`` produces ``key``."""
    if isinstance(v, Union):
        return [Case((g,) + c.guards, c.eqs)
                for g, alt in v.alts for c in _match(key, alt, samples, pos)]
    if isinstance(key, Shape):
        if not isinstance(v, (SVar, Const, App)):
            return []
        return [Case(g, ((v, pos),)) for g, sh in shape_cases(v, samples) if sh == key.tree]
    if isinstance(key, (bool, int, float, Fraction)):
        if not isinstance(v, (SVar, Const, App)):
            return []
        out = []
        pieces = ite_cases(v) if v.sort == T.REAL else [((), v)]
        for g, piece in pieces:
            if isinstance(piece, Const):
                if piece.value == key:
                    out.append(Case(g, ()))
            elif piece.sort == T.BOOL:
                out.append(Case(g + (piece if key else mk("not", piece),), ()))
            elif not T.depends_on_samples(piece):
                out.append(Case(g + (mk("=", piece, T.const(key, piece.sort)),), ()))
        return out
    if isinstance(key, tuple):
        if not isinstance(v, tuple) or len(v) != len(key):
            return []
        parts = [_match(k, x, samples, pos + (("i", i),)) for i, (k, x) in enumerate(zip(key, v))]
        return _combine(parts)
    if isinstance(key, PairV):
        if not isinstance(v, PairV):
            return []
        return _combine([_match(key.fst, v.fst, samples, pos + ("fst",)),
                         _match(key.snd, v.snd, samples, pos + ("snd",))])
    if isinstance(key, Just):
        if not isinstance(v, Just):
            return []
        return _match(key.value, v.value, samples, pos + ("just",))
    if key is NOTHING:
        return [Case((), ())] if v is NOTHING else []
    if isinstance(key, MapV):
        if not isinstance(v, MapV) or [k for k, _ in v.items] != [k for k, _ in key.items]:
            return []
        return _combine([_match(kv, x, samples, pos + (("k", k),))
                         for (k, kv), (_, x) in zip(key.items, v.items)])
    return [Case((), ())] if key == v else []


def _combine(parts: list) -> list:
    out = [Case((), ())]
    for cases in parts:
        if not cases:
            return []
        out = [Case(a.guards + b.guards, a.eqs + b.eqs) for a in out for b in cases]
    return out


def match_bucket_to_paths(key, paths: list[PathResult]) -> list[PathMatch]:
    """Paths (with the cases under which they do so) that can produce ``key``.

    Raises NoMatchingPath when none can.
    """
    found = []
    for p in paths:
        if p.truncated:
            continue
        cases = []
        for c in _match(key, p.output, p.samples, ()):
            guards = tuple(g for g in c.guards if not (isinstance(g, Const) and g.value))
            if not any(isinstance(g, Const) for g in guards):
                cases.append(Case(guards, c.eqs))
        if cases:
            found.append(PathMatch(p, tuple(cases)))
    if not found:
        raise NoMatchingPath(key)
    return found
