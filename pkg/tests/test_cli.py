import json
import os
import subprocess
import sys

from adtlearn.ads import ads_size
from adtlearn.cli import main
from adtlearn.fixtures import COFFEE_DOT
from adtlearn.mealy import MealyMachine, save_dot

import bruteforce


def test_learn_coffee(tmp_path, capsys):
    dot = tmp_path / "coffee.dot"
    dot.write_text(COFFEE_DOT, encoding="utf-8")
    stats = tmp_path / "s.json"
    hyp = tmp_path / "h.dot"
    adt = tmp_path / "a.dot"
    code = main(["learn", "--target", str(dot), "--learner", "ADT[NSE|NIR|NSR]", "--oracle", "exact",
                 "--stats", str(stats), "--emit-hypothesis", str(hyp), "--emit-adt", str(adt)])
    assert code == 0
    assert json.loads(stats.read_text())["SIZ"] == 6
    assert "SIZ=6" in capsys.readouterr().out
    assert main(["verify", str(hyp), str(dot)]) == 0
    assert "reset" in adt.read_text(encoding="utf-8")


def test_learn_csv_stats(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["learn", "--target", "coffee", "--learner", "DT", "--stats", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header.split(",")[0] == "R" and row.split(",")[14] == "6"


def test_ads_on_small_fixture(tmp_path, capsys):
    m = MealyMachine(["a", "b"], ["0", "1"], [[1, 2], [0, 2], [2, 0]], [[0, 0], [0, 1], [1, 1]])
    path = tmp_path / "m.dot"
    save_dot(m, str(path))
    assert main(["ads", str(path), "--profile", "MS"]) == 0
    err = capsys.readouterr().err
    size = int(err.split("size=")[1])
    assert size == bruteforce.ads_optimum(m, range(3), "MS")


def test_ads_missing(tmp_path, capsys):
    m = MealyMachine(["a"], ["0"], [[2], [2], [2]], [[0], [0], [0]])
    path = tmp_path / "m.dot"
    save_dot(m, str(path))
    assert main(["ads", str(path), "--states", "0,1"]) == 1
    assert "no ADS" in capsys.readouterr().err


def test_verify_reports_difference(tmp_path, capsys):
    a = MealyMachine(["a"], ["0", "1"], [[0]], [[0]])
    b = MealyMachine(["a"], ["0", "1"], [[1], [1]], [[0], [1]])
    save_dot(a, str(tmp_path / "a.dot"))
    save_dot(b, str(tmp_path / "b.dot"))
    assert main(["verify", str(tmp_path / "a.dot"), str(tmp_path / "a.dot")]) == 0
    assert "equivalent" in capsys.readouterr().out
    assert main(["verify", str(tmp_path / "a.dot"), str(tmp_path / "b.dot")]) == 1
    assert capsys.readouterr().out.strip() == "not equivalent: a a"


def test_usage_errors(tmp_path, capsys):
    assert main(["learn", "--target", str(tmp_path / "missing.dot")]) == 2
    assert main(["learn", "--target", "coffee", "--learner", "ADT[bad]"]) == 2
    bad = tmp_path / "bad.dot"
    bad.write_text('digraph g { __start -> a; a -> a [label="x"]; }')
    assert main(["verify", str(bad), str(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_bench_command(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"machine": [10, 2, 2], "seeds": 2, "configs": ["ADT[SE|NIR|SR_BE]", "DT"]}))
    out = tmp_path / "o.csv"
    assert main(["bench", str(cfg), "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 4 + 4
    assert "4 runs, 0 failed" in capsys.readouterr().out


def test_module_entry_point_and_numpy_fallback():
    env = dict(os.environ, ADTLEARN_DISABLE_NUMBA="1")
    code = ("from adtlearn import kernels; from adtlearn.harness import run_learning;"
            "from adtlearn.fixtures import coffee_machine;"
            "print(kernels.BACKEND, run_learning('ADT[NSE|NIR|NSR]', coffee_machine())[1].SIZ)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "6"]
    res = subprocess.run([sys.executable, "-m", "adtlearn.cli", "verify", "coffee", "coffee"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "equivalent"
