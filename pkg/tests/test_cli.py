import csv
import json
import subprocess
import sys

import pytest

from conftest import worked_example
from speedsched import io
from speedsched.cli import main
from speedsched.model import Instance


def write(path, inst):
    path.write_text(io.write_instance(inst))
    return str(path)


@pytest.fixture
def worked_file(tmp_path):
    return write(tmp_path / "worked.json", worked_example())


@pytest.fixture
def knapsack_file(tmp_path):
    return write(tmp_path / "knap.json", io.knapsack_instance([(1, 1), (2, 2)], "5/4"))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pd_energy(worked_file, capsys):
    code, out, _ = run(["pd-energy", worked_file, "--demand", "3"], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["energy"] == "281/100" and sorted(res["selected"]) == [1, 3, 4]
    assert res["throughput"] == 3 and res["solver"] == "pd-energy"


def test_verify_intact_and_tampered(worked_file, tmp_path, capsys):
    out = tmp_path / "res.json"
    assert main(["pd-energy", worked_file, "--demand", "3", "--out", str(out)]) == 0
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 0 and text.strip() == "ok"

    data = json.loads(out.read_text())
    data["energy"] = "14/5"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 4 and "energy" in err

    data = json.loads(out.read_text())
    data["dual"]["chain"][0]["beta"] = "-1"
    bad.write_text(json.dumps(data))
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 4 and "beta" in err

    data = json.loads(out.read_text())
    data["plan"][0][0]["speed"] = "1/1000"
    bad.write_text(json.dumps(data))
    assert run(["verify", str(bad)], capsys)[0] == 4

    data = json.loads(out.read_text())
    data["instance"]["jobs"][0]["w"] = 7
    bad.write_text(json.dumps(data))
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 4 and "digest" in err


def test_infeasible_demand(worked_file, capsys):
    code, _, err = run(["pd-energy", worked_file, "--demand", "5"], capsys)
    assert code == 1 and "infeasible" in err


def test_pd_throughput(worked_file, capsys):
    code, out, _ = run(["pd-throughput", worked_file, "--budget", "281/100"], capsys)
    res = json.loads(out)
    assert code == 0 and res["status"] == "converged" and res["throughput"] >= 3
    code, out, _ = run(["pd-throughput", worked_file, "--budget", "0"], capsys)
    assert code == 1 and json.loads(out)["status"] == "budget-too-small"


def test_exact_solvers_and_verify(knapsack_file, tmp_path, capsys):
    out = tmp_path / "dp.json"
    assert main(["dp-agreeable", knapsack_file, "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["throughput"] == 3 and res["energy"] == "5/4"
    assert run(["verify", str(out)], capsys)[0] == 0
    code, out, _ = run(["dp-equal", knapsack_file, "--budget", "9/8"], capsys)
    assert code == 0 and json.loads(out)["throughput"] == 2


def test_wrong_solver_is_bad_input(worked_file, tmp_path, capsys):
    nested = write(tmp_path / "nested.json",
                   Instance.identical(1, [(0, 4, 1, 1), (1, 3, 2, 1)], 3, budget=5))
    assert run(["dp-agreeable", nested], capsys)[0] == 2
    assert run(["dp-equal", nested], capsys)[0] == 2
    assert run(["dp-equal", worked_file, "--budget", "1"], capsys)[0] == 2


def test_oracle(worked_file, knapsack_file, tmp_path, capsys):
    code, out, _ = run(["oracle", worked_file, "--demand", "3"], capsys)
    assert code == 0
    assert io.as_scalar(json.loads(out)["energy"]) <= io.as_scalar("281/100")
    code, out, _ = run(["oracle", knapsack_file], capsys)
    assert code == 0 and json.loads(out)["throughput"] == 3
    code, out, _ = run(["oracle", knapsack_file, "--budget", "9/8", "--grid", "theta"], capsys)
    assert json.loads(out)["throughput"] == 2
    big = write(tmp_path / "big.json", Instance.identical(1, [(0, 2, 1, 1)] * 9, 3, budget=1))
    code, _, err = run(["oracle", big], capsys)
    assert code == 3 and "refused" in err


def test_gen_knapsack(capsys):
    code, out, _ = run(["gen", "knapsack", "--items", "1:1,2:2", "--capacity", "2"], capsys)
    assert code == 0
    assert io.read_instance(out) == io.knapsack_instance([(1, 1), (2, 2)], 2)
    assert run(["gen", "knapsack", "--items", "1:1"], capsys)[0] == 2


def test_gen_is_deterministic(capsys):
    a = run(["gen", "agreeable", "--seed", "3", "--n", "4"], capsys)[1]
    b = run(["gen", "agreeable", "--seed", "3", "--n", "4"], capsys)[1]
    assert a == b and io.read_instance(a).agreeable


def test_bad_input(tmp_path, capsys):
    assert run(["pd-energy", str(tmp_path / "missing.json"), "--demand", "1"], capsys)[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text('{"alpha": 3,')
    code, _, err = run(["pd-energy", str(broken), "--demand", "1"], capsys)
    assert code == 2 and "line 1" in err
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["dp-equal", str(broken), "--budget", "x"], capsys)[0] == 2


def test_missing_demand(worked_file, capsys):
    code, _, err = run(["pd-energy", worked_file], capsys)
    assert code == 2 and "--demand" in err


def test_csv_rows_are_exact(worked_file, tmp_path, capsys):
    table = tmp_path / "runs.csv"
    for _ in range(2):
        assert main(["pd-energy", worked_file, "--demand", "3", "--csv", str(table)]) == 0
    capsys.readouterr()
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["instance", "solver", "n", "m", "alpha", "demand_or_budget",
                       "throughput", "energy", "iterations", "ms"]
    assert len(rows) == 3
    assert rows[1][:8] == ["worked", "pd-energy", "4", "2", "3", "3", "3", "281/100"]


def test_float_mode(tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text('{"alpha": "5/2", "machines": 1, "jobs": [{"r": 0, "d": 2, "w": 1, "p": 1}]}')
    assert run(["pd-energy", str(path), "--demand", "1"], capsys)[0] == 2
    code, out, _ = run(["pd-energy", str(path), "--demand", "1", "--float"], capsys)
    assert code == 0
    assert abs(json.loads(out)["energy"] - 2 * 0.5 ** 2.5) < 1e-9


def test_module_entry_point(worked_file):
    proc = subprocess.run([sys.executable, "-m", "speedsched", "pd-energy", worked_file,
                           "--demand", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["energy"] == "281/100"
