import json
import subprocess
import sys

import numpy as np
import pytest

from cauchychar.cli import emit_field_grid, parse_complex_grid, parse_real_grid, run, to_json
from cauchychar.distributions import SampleSet, read_sample_csv
from cauchychar.cli import UsageError


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "x.csv"
    assert run(["sample", "--dist", "cauchy", "--gamma", "1+2i", "-n", "500",
                "--seed", "7", "--out", str(path)]) == 0
    return path


def test_sample_is_reproducible(tmp_path, data):
    other = tmp_path / "y.csv"
    run(["sample", "--dist", "cauchy", "--gamma", "1+2i", "-n", "500", "--seed", "7",
         "--out", str(other)])
    assert data.read_bytes() == other.read_bytes()
    assert len(read_sample_csv(data)) == 500


def test_sample_other_families(capsys):
    assert run(["sample", "--dist", "circular", "--w", "0.5", "-n", "4"]) == 0
    angles = [float(v) for v in capsys.readouterr().out.split()]
    assert len(angles) == 4 and all(0 <= a < 6.3 for a in angles)
    assert run(["sample", "--dist", "mixture", "--t", "0.3", "--gamma1", "i",
                "--gamma2", "2+i", "-n", "3"]) == 0


@pytest.mark.parametrize("argv", [
    ["sample", "--dist", "cauchy", "--gamma", "1-2i", "-n", "5"],
    ["sample", "--dist", "cauchy", "-n", "5"],
    ["sample", "--dist", "mixture", "--t", "0.3", "-n", "5"],
    ["sample", "--dist", "weibull", "-n", "5"],
    ["fit", "--estimator", "mle", "--in", "/nonexistent/file.csv"],
    ["verify", "--a-grid", "0.5,1.5"],
    ["bogus"],
])
def test_user_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err


def test_fit_json_is_byte_deterministic(data, tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"fit{k}.json"
        assert run(["fit", "--estimator", "mle", "--in", str(data), "--json",
                    "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["converged"] is True
    assert abs(complex(doc["estimate"]["re"], doc["estimate"]["im"]) - (1 + 2j)) < 0.5


@pytest.mark.parametrize("est", ["mellin", "logmoment"])
def test_fit_other_estimators(data, est, capsys):
    assert run(["fit", "--estimator", est, "--in", str(data), "--json"]) == 0
    assert "estimate" in json.loads(capsys.readouterr().out)


def test_fit_grid_option(data, capsys):
    assert run(["fit", "--estimator", "mellin", "--in", str(data), "--grid", "0.2:0.6:3",
                "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["converged"]


def test_fit_circular(tmp_path, capsys):
    path = tmp_path / "a.csv"
    run(["sample", "--dist", "circular", "--w", "0.3+0.2i", "-n", "2000", "--out", str(path)])
    assert run(["fit", "--estimator", "circular", "--in", str(path)]) == 0
    assert "estimate" in capsys.readouterr().out


def test_bad_csv_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\noops\n")
    assert run(["fit", "--estimator", "mle", "--in", str(path)]) == 1
    assert ":3:" in capsys.readouterr().err


def test_point_mass_is_user_error(tmp_path, capsys):
    path = tmp_path / "pm.csv"
    path.write_text("2\n2\n2\n")
    assert run(["fit", "--estimator", "mle", "--in", str(path)]) == 1


def test_numerical_failure_exits_2_without_partial_output(tmp_path, capsys):
    path = tmp_path / "pos.csv"
    path.write_text("".join(f"{v}\n" for v in range(1, 30)))
    out = tmp_path / "t.json"
    # a one-signed sample gives no half-plane Mellin estimates
    assert run(["test", "--method", "mellin", "--in", str(path), "--B", "99",
                "--out", str(out)]) == 2
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [path]


def test_gof_subcommand(data, capsys):
    assert run(["test", "--method", "mobius", "--in", str(data), "--B", "99", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["method"] == "mobius" and 0 < doc["p_value"] <= 1 and doc["B"] == 99
    assert run(["test", "--method", "mobius", "--in", str(data), "--B", "99",
                "--grid", "i,1+i,-1+2i"]) == 0
    assert len(json.loads(capsys.readouterr().out)["grid"]) == 3


def test_verify_subcommand(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert run(["verify", "--gamma-grid", "i,1+2i", "--a-grid", "0.3,0.7", "--out", str(out)]) == 0
    assert "mobius_mean" in capsys.readouterr().out
    rows = json.loads(out.read_text())
    assert all(r["pass"] for r in rows)
    assert run(["verify", "--gamma-grid", "i", "--a-grid", "0.5", "--tol-report"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["family"]


def test_field_subcommand(tmp_path, capsys):
    path = tmp_path / "two.csv"
    path.write_text("-1\n1\n")
    assert run(["field", "--in", str(path), "--gamma-grid", "i,-1+i"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "re_gamma,im_gamma,re_F,im_F"
    row = [float(v) for v in lines[1].split(",")]
    assert row == [0.0, 1.0, 0.0, 1.0]
    row = [float(v) for v in lines[2].split(",")]
    assert np.allclose(row[2:], [-0.5, 0.5], atol=1e-15)
    assert run(["field", "--in", str(path), "--re=-1:1:3", "--im", "1:2:2"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 7
    assert run(["field", "--in", str(path)]) == 1


def test_emit_field_grid_rejects_empty():
    with pytest.raises(UsageError):
        emit_field_grid(SampleSet([1.0, 2.0]), [])


def test_grid_parsers():
    assert parse_real_grid("0.1,0.2") == [0.1, 0.2]
    assert parse_real_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_complex_grid("i, 1+2i") == [1j, 1 + 2j]
    for bad in ("a,b", "0:1", "0:1:0", ""):
        with pytest.raises(UsageError):
            parse_real_grid(bad)


def test_to_json():
    text = to_json({"a": 0.1, "b": [1, None, True], "c": float("nan"), "z": 1 + 2j})
    doc = json.loads(text)
    assert doc["a"] == 0.1 and doc["c"] is None and doc["z"] == {"re": 1, "im": 2}
    assert "0.10000000000000001" in text


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cauchychar", "sample", "--dist", "cauchy",
                           "--gamma", "i", "-n", "3", "--seed", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and len(proc.stdout.split()) == 3
    proc = subprocess.run([sys.executable, "-m", "cauchychar", "sample", "--dist", "cauchy",
                           "--gamma", "-i", "-n", "3"], capture_output=True, text=True)
    assert proc.returncode == 1
