import csv
import io
import json
import subprocess
import sys

import pytest

from crflat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_family_i(capsys):
    code, out, _ = run(capsys, "check", "--family", "thm54_i", "--param", "D=1")
    doc = json.loads(out)
    assert code == 0
    assert list(doc) == ["config", "points", "summary"]
    assert doc["summary"]["labels"]["flat"] == 9
    assert doc["summary"]["n_points"] == 9
    p = doc["points"][0]
    assert list(p) == ["index", "point", "S", "S1", "J", "W", "residuals", "predicates",
                       "flags", "label", "guard"]


def test_check_two_degenerate_expr(capsys):
    code, out, _ = run(capsys, "check", "--form", "tube", "--expr", "(t1+t2)^2")
    doc = json.loads(out)
    assert code == 1
    assert doc["summary"]["labels"]["two_degenerate"] == 9


def test_check_rigid_complex_values(capsys):
    code, out, _ = run(capsys, "check", "--family", "fk", "--grid-n", "2")
    doc = json.loads(out)
    assert code == 0
    p = doc["points"][0]
    assert "S1bar" in p
    assert isinstance(p["S"], list) and len(p["S"]) == 2
    assert p["point"] == [[-0.05, -0.05], [-0.05, -0.05]]
    assert len(doc["points"]) == 16


def test_check_negative_control(capsys):
    code, out, _ = run(capsys, "check", "--family", "perturbed_i")
    assert code == 0
    assert json.loads(out)["summary"]["expected"] == "nonflat"
    code, _, _ = run(capsys, "check", "--family", "perturbed_i", "--expect", "flat")
    assert code == 1


def test_param_parabola(capsys):
    code, out, _ = run(capsys, "param", "--p", "v^2/2", "--q", "v", "--grid-w", "0.1")
    doc = json.loads(out)
    assert code == 0
    assert doc["firstcur"] == {"is_constant": True, "max_deviation": 0.0}
    assert all(p["residuals"]["ma_scaled"] < 1e-9 for p in doc["points"])


def test_param_invalid_profile(capsys):
    code, out, _ = run(capsys, "param", "--p", "v^3/6", "--q", "v")
    assert code == 1
    assert json.loads(out)["validation"]["passed"] is False


def test_ode(capsys):
    code, out, _ = run(capsys, "ode", "--ode-family", "case3", "--params", "C=-1", "D=pi/4",
                       "--samples", "8", "--p", "sqrt(1+v^2)-1")
    doc = json.loads(out)
    assert code == 0
    assert len(doc["points"]) == 8
    assert doc["summary"]["max_ode"] < 1e-10


def test_ode_guard_recorded(capsys):
    code, out, _ = run(capsys, "ode", "--ode-family", "case1", "--params", "D=0.1",
                       "--samples", "5", "--halfwidth", "0.2")
    doc = json.loads(out)
    labels = [p["label"] for p in doc["points"]]
    assert "out_of_domain" in labels and "ok" in labels
    assert code == 0


def test_families(capsys):
    code, out, _ = run(capsys, "families")
    doc = json.loads(out)
    assert code == 0
    assert doc["families"][0]["name"] == "thm54_i"


@pytest.mark.parametrize("argv", [
    ["check", "--family", "thm54_ii", "--param", "D=2"],
    ["check", "--family", "nope"],
    ["check", "--form", "tube", "--expr", "2*t1^^2"],
    ["check", "--expr", "t1^2"],
    ["check", "--family", "fk", "--grid-center", "0", "0"],
    ["ode", "--ode-family", "case2", "--params", "C=1", "D=3"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("crflat: error:")


def test_expression_error_position(capsys):
    _, _, err = run(capsys, "check", "--form", "tube", "--expr", "2*t1^^2")
    assert "position 5" in err


def test_argparse_usage_errors():
    for argv in (["check", "--order", "9", "--family", "fk"], ["bogus"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_csv_matches_json(capsys, tmp_path):
    args = ["check", "--family", "thm54_iii", "--grid-n", "2"]
    _, out_json, _ = run(capsys, *args)
    path = tmp_path / "r.csv"
    run(capsys, *args, "--format", "csv", "--out", str(path))
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    points = json.loads(out_json)["points"]
    assert len(rows) == len(points)
    for row, p in zip(rows, points):
        assert float(row["S.0"]) == p["S"][0] and float(row["S.1"]) == p["S"][1]
        assert float(row["residuals.cma_scaled"]) == p["residuals"]["cma_scaled"]
        assert row["label"] == p["label"]


def test_deterministic_bytes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        subprocess.run([sys.executable, "-m", "crflat", "check", "--family", "thm54_ii",
                        "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
