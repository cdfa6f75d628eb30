"""Command line: run campaigns, list benchmarks, compute bounds, dump SMT scripts."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import benchmarks as B
from .bucketing import bucket, match_bucket_to_paths
from .concrete import instrumented_runs
from .coupling import build_bucket_formula, emit_smtlib
from .errors import DomainError, DPTraceError, NoMatchingPath, SolverNotFound
from .harness import (ENGINES, TestConfig, failure_prob_bound, key_str, make_pair,
                      rdp_sample_bound, run_campaign, symbolic_paths)
from .solver import find_solver
from .symbolic import UnrollPolicy

EX_USAGE = 64
EX_UNAVAILABLE = 69


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _bench(name: str) -> B.BenchmarkEntry:
    try:
        return B.get(name)
    except KeyError as exc:
        raise argparse.ArgumentTypeError(exc.args[0])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dptrace", description="Test programs for (eps, 0)-differential privacy.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run a test campaign on one benchmark")
    t.add_argument("--bench", type=_bench, required=True, help="benchmark name (see list)")
    t.add_argument("--eps", type=float, help="privacy budget (default: catalog value)")
    t.add_argument("--ntraces", type=int, default=500, help="traces per pair (default 500)")
    t.add_argument("--ntests", type=int,
                   help="number of pairs (default 100 for correct, 50 for buggy entries)")
    t.add_argument("--seed", type=int, default=7, help="master seed (default 7)")
    t.add_argument("--engine", choices=ENGINES, help="symbolic engine (default: per benchmark)")
    t.add_argument("--solver", help="solver executable (default: $DPTRACE_SOLVER or z3)")
    t.add_argument("--timeout", type=float, default=60.0, help="seconds per query (default 60)")
    t.add_argument("--report", type=Path, help="write the JSON report here (default stdout)")
    t.add_argument("--dump-smt", type=Path, metavar="DIR", help="keep every SMT query here")
    t.add_argument("--jobs", type=int, default=1, help="pairs tested in parallel (default 1)")
    t.add_argument("--escalate", type=int, default=0, metavar="ROUNDS",
                   help="retry unknown pairs with 10x traces, up to ROUNDS times (default 0)")
    mode = t.add_mutually_exclusive_group()
    mode.add_argument("--stop-on-reject", dest="stop", action="store_true", default=None,
                      help="stop at the first rejected pair (default for buggy entries)")
    mode.add_argument("--full", dest="stop", action="store_false",
                      help="test every pair even after a rejection")

    sub.add_parser("list", help="list the benchmark catalog")

    b = sub.add_parser("bound", help="trace count needed for random differential privacy")
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--theta", type=float, default=0.0)
    b.add_argument("--n", type=int, required=True, help="Laplace calls per run")
    b.add_argument("--k", type=int, required=True, help="paths per output")
    b.add_argument("--c1", type=float, required=True, help="smallest shift")
    b.add_argument("--c2", type=float, required=True, help="largest shift")
    b.add_argument("--omega", type=float, required=True, help="sampling granularity")
    b.add_argument("--d", type=int, default=1, help="number of tests (default 1)")
    b.add_argument("--alpha", type=float, default=0.0)

    e = sub.add_parser("emit-smt", help="write one .smt2 file per bucket of a single pair")
    e.add_argument("--bench", type=_bench, required=True)
    e.add_argument("--eps", type=float)
    e.add_argument("--ntraces", type=int, default=500)
    e.add_argument("--seed", type=int, default=7)
    e.add_argument("--engine", choices=ENGINES)
    e.add_argument("--pair", type=int, default=0, help="index of the generated pair (default 0)")
    e.add_argument("--x1", type=_floats, help="first input, comma separated")
    e.add_argument("--x2", type=_floats, help="second input, comma separated")
    e.add_argument("--dump-smt", type=Path, metavar="DIR", required=True)
    return p


def cmd_test(args) -> int:
    entry = args.bench
    find_solver(args.solver)
    try:
        cfg = TestConfig(args.eps if args.eps is not None else entry.epsilon, args.ntraces,
                         args.ntests, args.seed, args.timeout, args.engine,
                         escalation_rounds=args.escalate, stop_on_reject=args.stop,
                         solver=args.solver, jobs=args.jobs,
                         dump_dir=str(args.dump_smt) if args.dump_smt else None)
    except DomainError as exc:
        raise UsageError(str(exc))
    if args.dump_smt:
        args.dump_smt.mkdir(parents=True, exist_ok=True)

    def progress(rec):
        extra = f" at {rec.reject_key}" if rec.reject_key else ""
        extra += f" ({rec.error_stage}: {rec.error})" if rec.error else ""
        print(f"pair {rec.index}: {rec.outcome}{extra}", file=sys.stderr)

    report = run_campaign(entry, cfg, progress)
    text = report.to_json(indent=2)
    if args.report:
        args.report.write_text(text + "\n")
    else:
        print(text)
    print(f"{entry.name} at eps={cfg.epsilon}: {report.outcome} "
          f"({len(report.pairs)} pairs, {report.rejections} rejected, "
          f"{report.unknowns} unknown, {report.timings['wall']:.1f}s)", file=sys.stderr)
    return report.exit_code


def cmd_list(args) -> int:
    for e in B.CATALOG.values():
        print(f"{e.name:12s} eps={e.epsilon:<5g} {e.relation:16s} {e.expected:7s} {e.notes}")
    return 0


def cmd_bound(args) -> int:
    try:
        m = rdp_sample_bound(args.delta, args.theta, args.n, args.k, args.c1, args.c2, args.omega)
        p = failure_prob_bound(args.d, args.theta, args.alpha)
    except DomainError as exc:
        raise UsageError(str(exc))
    print(f"m = {m}")
    print(f"failure probability <= {p!r}")
    return 0


def cmd_emit(args) -> int:
    entry = args.bench
    eps = args.eps if args.eps is not None else entry.epsilon
    if (args.x1 is None) != (args.x2 is None):
        raise UsageError("--x1 and --x2 go together")
    if args.x1 is None:
        pair = make_pair(entry, args.pair, 1, args.seed)
        x1, x2 = pair.x1, pair.x2
    else:
        x1, x2 = args.x1, args.x2
    runs = instrumented_runs(entry.build(x1), args.ntraces, args.seed, 1, args.pair)
    paths = symbolic_paths(entry.build(x2), UnrollPolicy.from_runs(runs),
                           args.engine or entry.engine)
    out = args.dump_smt
    out.mkdir(parents=True, exist_ok=True)
    index = {"benchmark": entry.name, "epsilon": eps, "x1": list(x1), "x2": list(x2),
             "buckets": []}
    for k, (key, rs) in enumerate(bucket(runs).items()):
        name = f"bucket{k}.smt2"
        try:
            script = emit_smtlib(build_bucket_formula(key, rs, match_bucket_to_paths(key, paths),
                                                      eps))
        except NoMatchingPath:
            script = f"; no symbolic path produces {key_str(key)}\n(assert false)\n(check-sat)\n"
        (out / name).write_text(script)
        index["buckets"].append({"file": name, "key": key_str(key), "ntraces": len(rs)})
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {len(index['buckets'])} scripts to {out}", file=sys.stderr)
    return 0


COMMANDS = {"test": cmd_test, "list": cmd_list, "bound": cmd_bound, "emit-smt": cmd_emit}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dptrace: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except SolverNotFound as exc:
        print(f"dptrace: {exc}", file=sys.stderr)
        return EX_UNAVAILABLE
    except DPTraceError as exc:
        print(f"dptrace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
