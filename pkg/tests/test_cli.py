import csv
import json

import numpy as np
import pytest

from hameig.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def test_list_catalog(capsys):
    code, out, _ = run(capsys, "list-catalog")
    assert code == 0
    for name in ("example-delay-phi", "eigendir", "gh-split", "const-f"):
        assert name in out


def test_check_example(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--problem", "example-delay-phi", "--rho", "1", "--out", str(tmp_path), "--emit", "json")
    assert code == 0
    assert "M_ρ(t)=2/√t+8" in out and "δ(t)=1/√t" in out
    assert "delta_bar = 0.1368036500" in out and "rho/delta_bar = 7.3097" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] and abs(report["delta_bar"] - 0.13680365007511064) < 1e-8


@pytest.mark.parametrize("flag,value,failing", [("--M", "0.5", "H2"), ("--delta", "0", "H3")])
def test_check_injected_failures(capsys, flag, value, failing):
    code, out, _ = run(capsys, "check", "--problem", "const-f", "--rho", "1", flag, value)
    assert code == 2
    assert f"[         fail] {failing}" in out and "witness" in out


def test_solve_constant_f(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--problem", "const-f", "--rho", "1", "--lambda", "8", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "solution.json").read_text())
    assert summary["converged"] and abs(summary["norm_u_minus_y"] - 1.0) < 1e-8
    data = read_csv(tmp_path / "solution.csv")
    assert list(data) == ["t", "u", "u_minus_y"]
    assert data["t"][0] == 0.0 and data["t"][-1] == 1.0 and np.all(np.diff(data["t"]) > 0)
    assert (tmp_path / "solution.svg").read_text().startswith("<svg")


def test_solve_lambda_zero_dumps_vertex(capsys, tmp_path):
    code, _, _ = run(capsys, "solve", "--problem", "example-delay-phi", "--lambda", "0", "--out", str(tmp_path))
    assert code == 0
    data = read_csv(tmp_path / "solution.csv")
    assert data["t"][0] == -0.5 and np.all(np.diff(data["t"]) > 0)
    assert np.all(data["u_minus_y"] == 0.0)


def test_solve_example_small_lambda(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--problem", "example-delay-phi", "--lambda", "0.1", "--out", str(tmp_path), "--emit", "json")
    assert code == 0
    summary = json.loads((tmp_path / "solution.json").read_text())
    assert summary["converged"] and summary["residual"] < 1e-8 and summary["cone"]["harnack"]


def test_solve_non_convergence_writes_json(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--problem", "example-delay-phi", "--lambda", "5", "--out", str(tmp_path), "--max-iter", "200")
    assert code == 3
    summary = json.loads((tmp_path / "solution.json").read_text())
    assert summary["converged"] is False and summary["mode"] in ("diverged", "max-iter")
    assert not (tmp_path / "solution.csv").exists()


@pytest.mark.parametrize("rho,expected", [("1", 8.0), ("2", 16.0)])
def test_scan_constant_f(capsys, tmp_path, rho, expected):
    code, out, _ = run(capsys, "scan", "--problem", "const-f", "--rho", rho, "--lambda-max", str(10 * float(rho)), "--out", str(tmp_path))
    assert code == 0
    result = json.loads((tmp_path / "scan.json").read_text())
    assert [round(p["lambda_star"], 9) for p in result["pairs"]] == [expected]
    assert (tmp_path / "n_lambda.svg").exists() and (tmp_path / "eigenpair_1.svg").exists()


def test_scan_example_and_round_trip(capsys, tmp_path):
    scan_dir, solve_dir = tmp_path / "scan", tmp_path / "solve"
    code, out, _ = run(capsys, "scan", "--problem", "example-delay-phi", "--rho", "1", "--out", str(scan_dir), "--threads", "1")
    assert code == 0
    result = json.loads((scan_dir / "scan.json").read_text())
    (pair,) = result["pairs"]
    assert pair["residual"] < 1e-6 and pair["norm_gap"] < 1e-6 and 0 < pair["lambda_star"] < result["lambda_bar"]
    lam = repr(pair["lambda_star"])
    code, _, _ = run(capsys, "solve", "--problem", "example-delay-phi", "--lambda", lam, "--init", str(scan_dir / "eigenpair_1.csv"), "--out", str(solve_dir), "--tol", "1e-8")
    assert code == 0
    again = json.loads((solve_dir / "solution.json").read_text())
    assert again["residual"] <= 2 * result["tol"]


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "scan", "--bogus")[0] == 4
    assert run(capsys, "check", "--problem", "no-such-problem")[0] == 4
    assert run(capsys, "solve", "--problem", "const-f")[0] == 4
    assert run(capsys, "check", "--problem", "const-f", "--rho", "-1")[0] == 4
    assert run(capsys, "check", "--problem", "const-f", "--M", "import os")[0] == 4
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nschema = 7\n")
    assert run(capsys, "check", "--config", str(bad))[0] == 4
    assert run(capsys)[0] == 4


def test_config_problem_end_to_end(capsys, tmp_path):
    cfg = tmp_path / "split.ini"
    cfg.write_text(
        "[problem]\n"
        "schema = 1\n"
        "f = 1 + v/2 + step(u - 1/2)\n"
        "sigma = t - 1/4\n"
        "omega = 1\n"
        "r = 0.25\n"
        "sigma_slope = 1\n"
        "M = 3.5\n"
        "delta = 1/2\n"
        "gamma = 1/2\n"
        "\n[run]\n"
        "rho = 1\n"
        f"out = {tmp_path / 'out'}\n"
        "emit = json\n"
    )
    code, out, _ = run(capsys, "check", "--config", str(cfg))
    assert code == 0, out
    code, out, _ = run(capsys, "scan", "--problem", str(cfg))
    assert code == 0
    result = json.loads((tmp_path / "out" / "scan.json").read_text())
    assert len(result["pairs"]) == 1 and result["pairs"][0]["cone"]["harnack"]


def test_string_params_from_command_line(tmp_path, capsys):
    code = main(["scan", "--problem", "gh-split", "--param", "jumps=0.5,1", "--param", "r=0.25",
                 "--threads", "2", "--out", str(tmp_path), "--emit", "json"])
    assert code in (0, 3)
    data = json.loads((tmp_path / "scan.json").read_text())
    assert "pairs" in data
    assert main(["check", "--problem", "const-f", "--param", "value=2"]) == 0
