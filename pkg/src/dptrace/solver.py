"""Driving an external SMT-LIB2 solver process."""

from __future__ import annotations

import os
import shutil
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ParseError, SolverCrashed, SolverNotFound

ENV_VAR = "DPTRACE_SOLVER"


@dataclass
class Sat:
    model: dict = field(default_factory=dict)
    transcript: str = ""


@dataclass
class Unsat:
    transcript: str = ""


@dataclass
class Unknown:
    reason: str = ""
    transcript: str = ""


@dataclass
class Timeout:
    transcript: str = ""


Verdict = Sat | Unsat | Unknown | Timeout


def find_solver(solver: str | list | None = None) -> list[str]:
    """Command line for the solver: explicit argument, $DPTRACE_SOLVER, or z3 on PATH."""
    if isinstance(solver, (list, tuple)):
        return list(solver)
    path = solver or os.environ.get(ENV_VAR) or shutil.which("z3")
    if not path:
        raise SolverNotFound(f"no SMT solver found; install z3 or set ${ENV_VAR}")
    if os.sep not in path:
        found = shutil.which(path)
        if found is None:
            raise SolverNotFound(f"solver {path!r} not found on PATH")
        path = found
    elif not Path(path).exists():
        raise SolverNotFound(f"solver {path!r} does not exist")
    return [path]


def _command(cmd: list[str], timeout: float) -> list[str]:
    name = Path(cmd[0]).name
    if len(cmd) > 1:
        return cmd
    if name.startswith("z3"):
        return cmd + ["-in", "-smt2", f"-T:{max(1, int(round(timeout)))}"]
    if name.startswith("cvc5") or name.startswith("cvc4"):
        return cmd + ["--lang=smt2", "--produce-models", f"--tlimit={int(timeout * 1000)}"]
    return cmd


def solve(script: str, timeout: float = 60.0, solver: str | list | None = None,
          dump: str | Path | None = None) -> Verdict:
    """Run one script; Sat models carry exact rationals.

    ``dump`` names a file receiving the script and the raw solver output.
    """
    cmd = _command(find_solver(solver), timeout)
    text = script
    if "(set-option :produce-models" not in text:
        text = "(set-option :produce-models true)\n" + text
    text += "(get-model)\n(get-info :reason-unknown)\n"
    try:
        proc = subprocess.run(cmd, input=text, capture_output=True, text=True,
                              timeout=timeout + 10)
    except subprocess.TimeoutExpired:
        return Timeout(text)
    except OSError as exc:
        raise SolverCrashed(f"cannot start {cmd[0]}: {exc}") from exc
    raw = proc.stdout
    if dump is not None:
        Path(dump).write_text(text + "\n; ---- solver output ----\n" + raw + proc.stderr)
    verdict = parse_output(raw, proc.returncode, proc.stderr)
    return verdict


def parse_output(raw: str, returncode: int = 0, stderr: str = "") -> Verdict:
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if not lines:
        raise SolverCrashed(f"solver exited with {returncode} and no output: {stderr[:200]}")
    head = lines[0]
    if head == "unsat":
        return Unsat(raw)
    if head == "timeout":
        return Timeout(raw)
    if head == "unknown":
        reason = _reason(raw)
        if any(w in reason for w in ("timeout", "canceled", "resource")):
            return Timeout(raw)
        return Unknown(reason, raw)
    if head == "sat":
        return Sat(parse_model(raw[raw.index("sat") + 3:]), raw)
    if head.startswith("(error"):
        raise SolverCrashed(head)
    raise ParseError(raw)


def _reason(raw: str) -> str:
    i = raw.find(":reason-unknown")
    if i < 0:
        return "unknown"
    rest = raw[i + len(":reason-unknown"):].strip()
    return rest.strip(')"\n ').strip('"') or "unknown"


# ---------------------------------------------------------------------------
# s-expressions


def tokenize(text: str) -> list[str]:
    out, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            out.append(text[i:j + 1])
            i = j + 1
        elif c == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(text: str) -> list:
    tokens = tokenize(text)
    pos = 0

    def one():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(one())
            if pos >= len(tokens):
                raise ParseError(text)
            pos += 1
            return items
        if tok == ")":
            raise ParseError(text)
        return tok

    out = []
    while pos < len(tokens):
        out.append(one())
    return out


def rational(sx) -> Fraction:
    """Exact value of a numeral, decimal, (- x) or (/ x y) s-expression."""
    if isinstance(sx, str):
        try:
            return Fraction(sx)
        except ValueError:
            raise ParseError(sx) from None
    if len(sx) == 2 and sx[0] == "-":
        return -rational(sx[1])
    if len(sx) == 3 and sx[0] == "/":
        return rational(sx[1]) / rational(sx[2])
    raise ParseError(str(sx))


def parse_model(text: str) -> dict:
    """Real and integer assignments from a (get-model) response."""
    model = {}
    for sx in parse_sexprs(text):
        if not isinstance(sx, list):
            continue
        defs = sx[1:] if sx and sx[0] == "model" else sx
        for d in defs:
            if isinstance(d, list) and len(d) == 5 and d[0] == "define-fun" and d[2] == []:
                if d[3] in ("Real", "Int"):
                    try:
                        model[d[1]] = rational(d[4])
                    except ParseError:
                        pass  # a defined function echoed back as an expression
                elif d[3] == "Bool":
                    model[d[1]] = d[4] == "true"
    return model
