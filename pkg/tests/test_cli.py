import json
import os
import subprocess
import sys

import pytest

import oracles
from dptrace.cli import main


def fake_solver(tmp_path, answer):
    path = tmp_path / "fake-solver"
    path.write_text(f"#!{sys.executable}\nimport sys\nsys.stdin.read()\nprint({answer!r})\n")
    path.chmod(0o755)
    return str(path)


def test_accepting_campaign_exits_zero(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = main(["test", "--bench", "nc", "--ntests", "2", "--ntraces", "20",
                 "--report", str(report)])
    assert code == 0
    d = json.loads(report.read_text())
    assert d["outcome"] == "pass" and d["aggregate"]["tests_run"] == 2
    assert "nc at eps=1.0: pass" in capsys.readouterr().err


def test_rejecting_campaign_exits_one(capsys):
    assert main(["test", "--bench", "nsBuggy", "--ntraces", "20"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["outcome"] == "reject" and out["aggregate"]["first_failure"] is not None


def test_inconclusive_campaign_exits_two(tmp_path):
    solver = fake_solver(tmp_path, "unknown")
    assert main(["test", "--bench", "ns", "--ntests", "1", "--ntraces", "5",
                 "--solver", solver, "--report", str(tmp_path / "r.json")]) == 2


@pytest.mark.parametrize("argv", [
    [],
    ["test"],
    ["test", "--bench", "noSuchBench"],
    ["test", "--bench", "nc", "--ntraces", "0"],
    ["test", "--bench", "nc", "--eps", "-1"],
    ["test", "--bench", "nc", "--full", "--stop-on-reject"],
    ["bound", "--delta", "2", "--n", "1", "--k", "1", "--c1", "0", "--c2", "1", "--omega", "1"],
    ["emit-smt", "--bench", "nc", "--x1", "1", "--dump-smt", "out"],
])
def test_usage_errors_exit_64(argv, capsys):
    assert main(argv) == 64


def test_missing_solver_exits_69(capsys):
    assert main(["test", "--bench", "nc", "--solver", "/no/such/solver"]) == 69
    assert "solver" in capsys.readouterr().err.lower()


def test_bound_output(capsys):
    code = main(["bound", "--delta", "1e-5", "--n", "3", "--k", "3",
                 "--c1", "-3", "--c2", "3", "--omega", "9.5e-7", "--d", "10",
                 "--theta", "0.6931471805599453"])
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    expected = oracles.sample_bound(1e-5, 0.6931471805599453, 3, 3, -3, 3, 9.5e-7)
    assert lines[0] == f"m = {expected}"
    p = float(lines[1].split("<=")[1])
    assert p == pytest.approx(oracles.failure_prob(10, 0.6931471805599453, 0))


def test_list_shows_every_benchmark(capsys):
    from dptrace.benchmarks import CATALOG
    assert main(["list"]) == 0
    names = [ln.split()[0] for ln in capsys.readouterr().out.splitlines()]
    assert names == list(CATALOG)


def test_emit_smt_writes_scripts(tmp_path):
    out = tmp_path / "smt"
    assert main(["emit-smt", "--bench", "rnm", "--x1", "0,0.5", "--x2", "0.5,0",
                 "--ntraces", "50", "--dump-smt", str(out)]) == 0
    index = json.loads((out / "index.json").read_text())
    assert index["x1"] == [0.0, 0.5] and {b["key"] for b in index["buckets"]} == {"0", "1"}
    for b in index["buckets"]:
        text = (out / b["file"]).read_text()
        assert text.startswith("(set-logic QF_LRA)") and text.rstrip().endswith("(check-sat)")
    assert sum(b["ntraces"] for b in index["buckets"]) == 50


def test_module_entry_point():
    env = dict(os.environ, PYTHONPATH=os.pathsep.join(sys.path))
    r = subprocess.run([sys.executable, "-m", "dptrace", "bound", "--delta", "0.5", "--n", "1",
                        "--k", "1", "--c1", "0", "--c2", "1", "--omega", "1"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and r.stdout.startswith("m = ")
