"""Test orchestration: one input pair (expect_dp), campaigns, reports, bounds."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import dsl as D
from .benchmarks import BenchmarkEntry
from .bucketing import Shape, bucket, match_bucket_to_paths
from .concrete import instrumented_runs
from .coupling import build_bucket_formula, emit_smtlib, replay_witness
from .errors import DomainError, DPTraceError, NoMatchingPath, SolverNotFound
from .generators import GENERATORS, size_ramp
from .solver import Sat, Timeout, Unknown, Unsat, solve
from .symbolic import UnrollPolicy, explore, merged_symbolic_run

ENGINES = ("streamline", "merged")

PASS, REJECT, UNKNOWN, ERROR = "pass", "reject", "unknown", "error"


@dataclass
class TestConfig:
    epsilon: float
    ntraces: int = 500
    ntests: int | None = None  # None: 100 when expecting accept, 50 otherwise
    master_seed: int = 7
    solver_timeout: float = 60.0
    engine: str | None = None  # None: the benchmark's preferred engine
    size_ramp: tuple | None = None
    value_range: tuple | None = None
    escalation_rounds: int = 0
    stop_on_reject: bool | None = None  # None: stop early when expecting reject
    all_buckets: bool = False  # keep solving after the first rejecting bucket
    replay: bool = True
    solver: Any = None
    dump_dir: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.ntraces < 1:
            raise DomainError("ntraces must be at least 1")
        if self.epsilon < 0:
            raise DomainError("epsilon must be nonnegative")
        if self.engine is not None and self.engine not in ENGINES:
            raise DomainError(f"engine must be one of {ENGINES}")


@dataclass
class BucketVerdict:
    key: str
    ntraces: int
    verdict: str  # sat, unsat, no-match, unknown, timeout, skipped
    paths: int = 0
    shifts: dict = field(default_factory=dict)
    replay_ok: bool | None = None
    max_cost: float | None = None
    reason: str = ""
    seconds: float = 0.0


@dataclass
class PairRecord:
    index: int
    seeds: dict
    x1: list
    x2: list
    outcome: str = PASS
    reject_key: str | None = None
    bucket_verdicts: list = field(default_factory=list)
    ntraces: int = 0
    npaths: int = 0
    truncated_paths: int = 0
    error_stage: str | None = None
    error: str | None = None
    timings: dict = field(default_factory=dict)


@dataclass
class TestReport:
    benchmark: str
    epsilon: float
    engine: str
    master_seed: int
    pairs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def rejections(self) -> int:
        return sum(p.outcome == REJECT for p in self.pairs)

    @property
    def unknowns(self) -> int:
        return sum(p.outcome in (UNKNOWN, ERROR) for p in self.pairs)

    @property
    def first_failure(self) -> int | None:
        return next((p.index for p in self.pairs if p.outcome == REJECT), None)

    @property
    def outcome(self) -> str:
        if self.rejections:
            return REJECT
        return UNKNOWN if self.unknowns else PASS

    @property
    def exit_code(self) -> int:
        return {PASS: 0, REJECT: 1, UNKNOWN: 2}[self.outcome]

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "epsilon": self.epsilon,
            "engine": self.engine,
            "outcome": self.outcome,
            "seeds": {"master": self.master_seed},
            "aggregate": {"tests_run": len(self.pairs), "rejections": self.rejections,
                          "unknowns": self.unknowns, "first_failure": self.first_failure},
            "timings": self.timings,
            "pairs": [asdict(p) for p in self.pairs],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# Rendering keys


def key_str(key) -> str:
    if isinstance(key, Shape):
        return str(key)
    if isinstance(key, tuple):
        return "[" + ", ".join(key_str(k) for k in key) + "]"
    if isinstance(key, D.PairV):
        return f"({key_str(key.fst)}, {key_str(key.snd)})"
    if isinstance(key, D.Just):
        return f"Just {key_str(key.value)}"
    if key is D.NOTHING:
        return "Nothing"
    if isinstance(key, D.MapV):
        return "{" + ", ".join(f"{k}: {key_str(v)}" for k, v in key.items) + "}"
    return repr(key)


# ---------------------------------------------------------------------------
# One pair


def symbolic_paths(prog2: D.Expr, policy: UnrollPolicy, engine: str) -> list:
    if engine == "merged":
        return merged_symbolic_run(prog2, policy)
    return explore(prog2, policy)


def _shifts(model: dict) -> dict:
    return {int(k[2:]): v for k, v in model.items() if k.startswith("sh") and k[2:].isdigit()}


def expect_dp(build: Callable, x1, x2, epsilon, ntraces: int = 500, *,
              master_seed: int = 7, index: int = 0, engine: str = "streamline",
              solver=None, timeout: float = 60.0, stop_on_reject: bool = True,
              replay: bool = True, escalation_rounds: int = 0,
              dump_dir: str | None = None) -> PairRecord:
    """Test one input pair: pass iff every output bucket admits a coupling.

    Traces are drawn on ``build(x1)`` from stream (master_seed, 1, index);
    the symbolic side runs on ``build(x2)``.
    """
    rec = PairRecord(index, {"master": master_seed, "traces": [1, index]}, list(x1), list(x2))
    n = ntraces
    for _ in range(escalation_rounds + 1):
        rec.bucket_verdicts, rec.outcome, rec.reject_key = [], PASS, None
        rec.error_stage = rec.error = None
        _one_round(rec, build, epsilon, n, master_seed, index, engine, solver, timeout,
                   stop_on_reject, replay, dump_dir)
        if rec.outcome != UNKNOWN:
            break
        n *= 10
    return rec


def _one_round(rec, build, epsilon, ntraces, master_seed, index, engine, solver,
               timeout, stop_on_reject, replay, dump_dir):
    t = rec.timings
    stage = "build"
    try:
        t0 = time.perf_counter()
        prog1, prog2 = build(tuple(rec.x1)), build(tuple(rec.x2))
        D.typecheck(prog1)
        D.typecheck(prog2)
        stage = "instrument"
        runs = instrumented_runs(prog1, ntraces, master_seed, 1, index)
        rec.ntraces = ntraces
        t1 = time.perf_counter()
        t["instrument"] = t1 - t0
        stage = "symbolic"
        policy = UnrollPolicy.from_runs(runs)
        paths = symbolic_paths(prog2, policy, engine)
        rec.npaths = len(paths)
        rec.truncated_paths = sum(p.truncated for p in paths)
        t2 = time.perf_counter()
        t["symbolic"] = t2 - t1
        stage = "solve"
        buckets = bucket(runs)
        rejected = False
        for k, (key, brs) in enumerate(buckets.items()):
            ks = key_str(key)
            if rejected and stop_on_reject:
                rec.bucket_verdicts.append(BucketVerdict(ks, len(brs), "skipped"))
                continue
            bv = _bucket(key, ks, brs, paths, prog2, epsilon, solver, timeout, replay,
                         dump_dir and f"{dump_dir}/pair{index}_bucket{k}.smt2")
            rec.bucket_verdicts.append(bv)
            if bv.verdict in ("unsat", "no-match"):
                rejected = True
                if rec.reject_key is None:
                    rec.reject_key = ks
        t["solve"] = time.perf_counter() - t2
    except SolverNotFound:
        raise
    except DPTraceError as exc:
        rec.outcome, rec.error_stage, rec.error = ERROR, stage, f"{type(exc).__name__}: {exc}"
        return
    verdicts = {b.verdict for b in rec.bucket_verdicts}
    if verdicts & {"unsat", "no-match"}:
        rec.outcome = REJECT
    elif verdicts & {"unknown", "timeout", "replay-failed"}:
        rec.outcome = UNKNOWN


def _bucket(key, ks, runs, paths, prog2, epsilon, solver, timeout, replay, dump) -> BucketVerdict:
    t0 = time.perf_counter()
    bv = BucketVerdict(ks, len(runs), "unknown")
    try:
        matches = match_bucket_to_paths(key, paths)
    except NoMatchingPath:
        bv.verdict, bv.reason = "no-match", "no symbolic path produces this output"
        bv.seconds = time.perf_counter() - t0
        return bv
    bv.paths = len(matches)
    formula = build_bucket_formula(key, runs, matches, epsilon)
    verdict = solve(emit_smtlib(formula), timeout, solver, dump)
    if isinstance(verdict, Sat):
        shifts = _shifts(verdict.model)
        bv.verdict = "sat"
        bv.shifts = {f"sh{j}": str(v) for j, v in sorted(shifts.items())}
        if replay:
            rr = replay_witness(prog2, key, runs, shifts, epsilon)
            bv.replay_ok, bv.max_cost = rr.ok, float(rr.max_cost)
            if not rr.ok:
                bv.verdict, bv.reason = "replay-failed", str(rr.failures[:3])
    elif isinstance(verdict, Unsat):
        bv.verdict = "unsat"
        bv.reason = formula.unsat_reason or ""
    elif isinstance(verdict, Timeout):
        bv.verdict = "timeout"
    else:
        bv.verdict, bv.reason = "unknown", verdict.reason
    bv.seconds = time.perf_counter() - t0
    return bv


# ---------------------------------------------------------------------------
# Campaigns


def make_pair(entry: BenchmarkEntry, i: int, ntests: int, master_seed: int,
              sizes: tuple | None = None, values: tuple | None = None):
    lo, hi = sizes or entry.sizes
    vlo, vhi = values or entry.values
    gen = GENERATORS[entry.relation]
    return gen(size_ramp(i, ntests, lo, hi), entry.k, (master_seed, 0, i), lo=vlo, hi=vhi)


def _pair_job(args):
    entry, cfg, engine, stop, i, ntests = args
    pair = make_pair(entry, i, ntests, cfg.master_seed, cfg.size_ramp, cfg.value_range)
    rec = expect_dp(entry.build, pair.x1, pair.x2, cfg.epsilon, cfg.ntraces,
                    master_seed=cfg.master_seed, index=i, engine=engine, solver=cfg.solver,
                    timeout=cfg.solver_timeout, stop_on_reject=not cfg.all_buckets,
                    replay=cfg.replay, escalation_rounds=cfg.escalation_rounds,
                    dump_dir=cfg.dump_dir)
    rec.seeds["pair"] = [0, i]
    return rec


def run_campaign(entry: BenchmarkEntry, config: TestConfig,
                 progress: Callable[[PairRecord], None] | None = None) -> TestReport:
    """Test ``ntests`` generated pairs with ramped input sizes.

    Stops at the first rejection when ``stop_on_reject`` (by default, when
    the entry is expected to be rejected).
    """
    engine = config.engine or entry.engine
    ntests = config.ntests or (100 if entry.expected == "accept" else 50)
    stop = config.stop_on_reject
    if stop is None:
        stop = entry.expected == "reject"
    report = TestReport(entry.name, config.epsilon, engine, config.master_seed)
    t0 = time.perf_counter()
    jobs = [(entry, config, engine, stop, i, ntests) for i in range(ntests)]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            results = pool.map(_pair_job, jobs)
            for rec in results:
                report.pairs.append(rec)
                if progress:
                    progress(rec)
                if stop and rec.outcome == REJECT:
                    break
    else:
        for job in jobs:
            rec = _pair_job(job)
            report.pairs.append(rec)
            if progress:
                progress(rec)
            if stop and rec.outcome == REJECT:
                break
    report.timings["wall"] = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# Sample-size bound for random differential privacy


def _ln(x: Fraction) -> float:
    """Natural log of a positive rational too large or small for a float."""
    return math.log(x.numerator) - math.log(x.denominator)


def ln_shift_range(c1, c2, omega) -> float:
    """ln((c2 - c1) / omega), computed exactly up to the final logarithms."""
    return _ln((Fraction(c2) - Fraction(c1)) / Fraction(omega))


def rdp_sample_bound(delta, theta, n, k, c1, c2, omega) -> int:
    """Smallest trace count m with m >= (theta + nk ln 2 + nk ln((c2-c1)/omega)) / delta."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if not c2 > c1:
        raise DomainError("c2 must exceed c1")
    if not omega > 0:
        raise DomainError("omega must be positive")
    if n < 1 or k < 1:
        raise DomainError("n and k must be at least 1")
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    nk = n * k
    rhs = (theta + nk * math.log(2) + nk * ln_shift_range(c1, c2, omega)) / delta
    return max(0, math.ceil(rhs))


def failure_prob_bound(d, theta, alpha) -> float:
    """exp(-d (theta + alpha))."""
    if d < 1:
        raise DomainError("d must be at least 1")
    if theta < 0 or alpha < 0:
        raise DomainError("theta and alpha must be nonnegative")
    return math.exp(-d * (theta + alpha))
