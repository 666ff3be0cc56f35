import json
import subprocess
import sys

import numpy as np
import pytest

from diracbracket.cli import EXIT_FAILED, EXIT_MALFORMED, EXIT_OBSTRUCTED, EXIT_OK, main
from diracbracket.fixtures import bundled_path


def check(name, *extra):
    return main(["check", str(bundled_path(name)), "--points", "12", *extra])


def report_of(name, tmp_path, *extra):
    out = tmp_path / f"{name}-report.json"
    code = check(name, "--report", str(out), *extra)
    return code, json.loads(out.read_text())


def by_name(report):
    return {c["name"]: c for c in report["checks"]}


def test_example1_passes_exactly(tmp_path):
    code, rep = report_of("example1", tmp_path)
    assert code == EXIT_OK
    checks = by_name(rep)
    assert checks["casimir"]["max_residual"] == "exact-zero"
    assert checks["jacobi"]["max_residual"] == "exact-zero"
    assert rep["classification"] == "jacobi_and_casimir"


def test_counterexample_exits_one(tmp_path):
    code, rep = report_of("counterexample", tmp_path)
    assert code == EXIT_FAILED
    assert rep["classification"] == "jacobi_only"


def test_obstructed_exits_two_with_witness(capsys):
    assert check("obstructed") == EXIT_OBSTRUCTED
    err = capsys.readouterr().err
    line = next(x for x in err.splitlines() if x.startswith("witness vector:"))
    w = np.array(json.loads(line.split(":", 1)[1]))
    np.testing.assert_allclose(np.abs(w), [0, 0, 1], atol=1e-10)


@pytest.mark.parametrize("name", ["firstclass", "dependent"])
def test_redundant_constraint_fixtures_pass(name):
    assert check(name) == EXIT_OK


def test_broken_structure_fails():
    assert check("broken-jacobi") == EXIT_FAILED


def test_literal_constant_D_is_rejected(tmp_path):
    code, rep = report_of("example1-constant-D", tmp_path)
    assert code == EXIT_FAILED
    forD = by_name(rep)["forD_residual"]
    assert forD["status"] == "fail"
    assert forD["detail"]["polynomial"] == "z1*z3 - z3"
    assert "rejected" in forD["detail"]


def test_malformed_input_exits_three(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"variables": ["q", "p"], "poisson": {"1,2": "q * * p"}}))
    assert main(["validate", str(bad)]) == EXIT_MALFORMED
    assert "poisson['1,2']" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_MALFORMED
    assert main(["check"]) == EXIT_MALFORMED
    assert main(["frobnicate", "x"]) == EXIT_MALFORMED


def test_validate(capsys):
    assert main(["validate", str(bundled_path("example1"))]) == EXIT_OK
    assert "N=5 M=3" in capsys.readouterr().out


@pytest.mark.parametrize("name", ["example1", "firstclass", "counterexample"])
def test_build_then_check_reproduces_report(name, tmp_path):
    built = tmp_path / "sys.json"
    assert main(["build", str(bundled_path(name)), "--out", str(built)]) == EXIT_OK
    derived = json.loads(built.read_text())["derived"]
    assert "C" in derived
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code_a = main(["check", str(bundled_path(name)), "--points", "10", "--seed", "4", "--report", str(a)])
    code_b = main(["check", str(built), "--points", "10", "--seed", "4", "--report", str(b)])
    assert code_a == code_b
    assert a.read_bytes() == b.read_bytes()


def test_build_writes_exact_Jstar(tmp_path):
    built = tmp_path / "sys.json"
    main(["build", str(bundled_path("example1")), "--out", str(built)])
    derived = json.loads(built.read_text())["derived"]
    assert derived["Jstar"][3][4] == "-1" and derived["Jstar"][0] == ["0"] * 5
    assert derived["D_provenance"] == "user_supplied"


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = main(["simulate", str(bundled_path("example1")), "--dt", "1e-2", "--steps", "100",
                 "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "t,z1,z2,z3,w1,w2,drift_phi_max,drift_H"
    assert len(lines) == 102
    assert main(["simulate", str(bundled_path("obstructed")), "--out", str(out)]) == EXIT_MALFORMED


def test_simulate_z0_override(tmp_path):
    out = tmp_path / "traj.csv"
    code = main(["simulate", str(bundled_path("example1")), "--steps", "3", "--out", str(out),
                 "--z0", "1,1,1,0,1", "--precision", "double"])
    assert code == EXIT_OK
    assert out.read_text().splitlines()[1].startswith("0,1")
    assert main(["simulate", str(bundled_path("example1")), "--out", str(out), "--z0", "1,2"]) \
        == EXIT_MALFORMED


def test_json_output_is_the_report(capsys, tmp_path):
    out = tmp_path / "r.json"
    check("firstclass", "--json", "--report", str(out))
    assert capsys.readouterr().out == out.read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "diracbracket", "check",
                           str(bundled_path("obstructed")), "--points", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OBSTRUCTED
    assert "witness vector" in proc.stderr
