import csv
import io
import json
import math
import subprocess
import sys

import pytest

from conclab import cli
from conclab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_moments_prints_value(capsys):
    code, out, _ = run(capsys, "moments", "--p", "2", "--n", "5", "--v", "2")
    assert code == 0 and out == "0.2\n"


def test_certificate_prints_raw_bound(capsys):
    code, out, _ = run(capsys, "certificate", "--id", "cone_lipschitz", "--p", "2", "--n", "100", "--t", "0.5")
    assert code == 0 and float(out) == pytest.approx(2 * math.exp(-100 * 0.25 / 96), rel=1e-15)
    code, out, _ = run(capsys, "certificate", "--id", "cone_lipschitz", "--p", "2", "--n", "100", "--t", "0.5",
                       "--capped")
    assert float(out) == 1.0


def test_certificate_missing_parameter(capsys):
    code, _, err = run(capsys, "certificate", "--id", "cone_lipschitz", "--p", "2", "--t", "1")
    assert code == 2 and "usage:" in err


def test_unknown_command_and_missing_seed(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sample", "cone", "--n", "3"])
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_locallaw_needs_two_sizes(capsys):
    code, _, err = run(capsys, "locallaw", "--seed", "1", "--n-list", "100")
    assert code == 2 and "at least two sizes" in err


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "moments", "--p", "1", "--n", "5", "--v", "2")
    assert code == 2 and "usage:" in err


def test_sample_csv_has_header(capsys):
    code, out, _ = run(capsys, "sample", "surface", "--p", "3", "--n", "4", "--size", "5", "--seed", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["x0", "x1", "x2", "x3", "importance_weight"] and len(rows) == 6


def test_json_summary_schema(tmp_path, capsys):
    out, summ = tmp_path / "t.csv", tmp_path / "s.json"
    code, _, _ = run(capsys, "tails", "lipschitz", "--n", "20", "--replicas", "500", "--seed", "3",
                     "--out", str(out), "--summary", str(summ))
    doc = json.loads(summ.read_text())
    assert code == 0
    assert set(doc) == {"command", "params", "constants_used", "seed", "pass", "artifacts"}
    assert doc["seed"] == 3 and doc["artifacts"] == [str(out)] and doc["pass"] is True
    assert out.read_text().startswith("experiment,t,")


def test_json_format(capsys):
    code, out, _ = run(capsys, "edgeworth", "--n", "12", "--replicas", "50", "--seed", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "edgeworth" and "data" in doc


def test_violation_exit_code(capsys, monkeypatch):
    code, _, _ = run(capsys, "tails", "maxweight", "--n", "20", "--replicas", "200", "--seed", "1")
    assert code == 0
    monkeypatch.setattr(cli, "cmd_curvature", lambda args: cli.Report("x\n", {}, passed=False))
    code, out, _ = run(capsys, "curvature", "--p", "3")
    assert code == 1 and out == "x\n"


@pytest.mark.parametrize("argv", [
    ["sample", "haar", "--n", "3", "--size", "2"],
    ["tails", "hw", "--n", "10", "--p", "4", "--replicas", "300", "--matrix", "random"],
    ["lsq-check", "--p", "2", "--n", "10", "--function", "exp"],
])
def test_same_seed_same_bytes(argv, tmp_path):
    paths = [tmp_path / "a", tmp_path / "b"]
    for p in paths:
        assert main(argv + ["--seed", "7", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "conclab", "moments", "--p", "2", "--n", "4", "--v", "4"],
                         capture_output=True, text=True, check=True)
    assert float(res.stdout) == pytest.approx(1 / 8)
