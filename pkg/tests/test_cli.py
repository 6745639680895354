import json
import subprocess
import sys

import pytest

from qoscompose.cli import main
from qoscompose.instances import save_instance

from conftest import TABLE1, make_problem, small_instance


def _value(out, label):
    for line in out.splitlines():
        if line.startswith(label):
            return line[len(label):].strip()
    raise AssertionError(f"{label!r} not in output")


@pytest.fixture
def inst81(tmp_path):
    path = tmp_path / "i81.json"
    save_instance(small_instance(), path)
    return path


def test_gen_pool_and_instance(tmp_path, capsys):
    pool = tmp_path / "pool.csv"
    assert main(["gen", "pool", "--seed", "1", "--size", "40", "--out", str(pool)]) == 0
    assert len(pool.read_text().splitlines()) == 41
    inst = tmp_path / "inst.json"
    rc = main(["gen", "instance", "--seed", "2", "--tasks", "4", "--candidates", "5", "--pool", str(pool),
               "--header", "--shape", "mixed", "--out", str(inst)])
    assert rc == 0
    assert main(["validate", "--instance", str(inst)]) == 0
    assert "4 tasks, 625 combinations" in capsys.readouterr().out


def test_gen_requires_seed(tmp_path):
    assert main(["gen", "pool", "--out", str(tmp_path / "p.csv")]) == 1


def test_solve_writes_record(inst81, tmp_path, capsys):
    rec = tmp_path / "r.json"
    rc = main(["solve", "--instance", str(inst81), "--algo", "sfga", "--seed", "42", "--generations", "100",
               "--pop", "50", "--memeplexes", "5", "--out", str(rec)])
    assert rc == 0
    doc = json.loads(rec.read_text())
    assert doc["algorithm"] == "sfga" and doc["seed"] == 42
    assert len(_value(capsys.readouterr().out, "best genome").split()) == 4


def test_solve_without_seed_is_usage_error(inst81, capsys):
    assert main(["solve", "--instance", str(inst81), "--algo", "sfga"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_solve_baseline_with_knobs(inst81):
    assert main(["solve", "--instance", str(inst81), "--algo", "ga", "--seed", "1", "--generations", "20",
                 "--pop", "10", "--set", "mutation_rate=0.3"]) == 0
    assert main(["solve", "--instance", str(inst81), "--algo", "ga", "--seed", "1", "--set", "bogus=1"]) == 2


def test_oracle_not_worse_than_solve(inst81, capsys):
    assert main(["oracle", "--instance", str(inst81)]) == 0
    best = float(_value(capsys.readouterr().out, "best fitness"))
    equal = 0
    for seed in range(5):
        assert main(["solve", "--instance", str(inst81), "--algo", "sfga", "--seed", str(seed),
                     "--pop", "30", "--memeplexes", "3", "--generations", "200"]) == 0
        got = float(_value(capsys.readouterr().out, "best fitness"))
        assert best <= got
        equal += got == best
    assert equal >= 3


def test_oracle_too_large(tmp_path):
    path = tmp_path / "big.json"
    save_instance(make_problem(TABLE1), path)
    assert main(["oracle", "--instance", str(path), "--cap", "1000"]) == 2


def test_validate_reports_violations(tmp_path, capsys):
    path = tmp_path / "bad.json"
    save_instance(make_problem(TABLE1[:2], weights=(0.5, 0.5, 0.5)), path)
    assert main(["validate", "--instance", str(path)]) == 2
    assert "WeightSumMismatch" in capsys.readouterr().err


def test_data_errors(tmp_path):
    assert main(["validate", "--instance", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "t.json").write_text('{"schema": "qoscompose/1", "tasks": [')
    assert main(["validate", "--instance", str(tmp_path / "t.json")]) == 2


def test_bench_and_stats(tmp_path, capsys):
    spec = {
        "schema": "qosbench/1",
        "name": "mini",
        "levels": [3, 4],
        "seeds": [0, 1],
        "task_count": 3,
        "population_size": 10,
        "evaluations": 60,
        "overrides": {"sfga": {"memeplex_count": 2}},
    }
    sp = tmp_path / "spec.json"
    sp.write_text(json.dumps(spec))
    out = tmp_path / "out"
    assert main(["bench", "--spec", str(sp), "--out-dir", str(out), "--no-timing", "--seeds", "0-2"]) == 0
    records = (out / "records.csv").read_text()
    assert len(records.splitlines()) == 1 + 2 * 5 * 3
    for name in ("traces.csv", "boxplot_agg_energy.csv", "boxplot_agg_energy_L3.csv", "summary.txt"):
        assert (out / name).exists()
    capsys.readouterr()
    assert main(["stats", "--records", str(out / "records.csv"), "--by-level"]) == 0
    text = capsys.readouterr().out
    assert "Std. Deviation" in text and "level 4" in text
    assert main(["stats", "--records", str(out / "records.csv"), "--metric", "all"]) == 0


def test_bench_needs_a_source(tmp_path):
    assert main(["bench", "--out-dir", str(tmp_path)]) == 1


def test_module_entry_point(inst81):
    proc = subprocess.run([sys.executable, "-m", "qoscompose", "oracle", "--instance", str(inst81)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "combinations  81" in proc.stdout
