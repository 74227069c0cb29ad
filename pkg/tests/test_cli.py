from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from rcri.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analytic_exponential_prints_half(capsys):
    code, out, _ = run(capsys, "analytic", "--spec", "exponential:1", "--alpha", "1", "--beta", "1", "--theta", "1")
    assert code == 0 and out == "value\n0.5\n"


def test_analytic_two_laws_and_json(capsys):
    code, out, _ = run(capsys, "analytic", "--spec", "exponential:1", "--spec-y", "exponential:3",
                       "--beta", "2", "--format", "json")
    assert code == 0 and json.loads(out)[0]["value"] == pytest.approx(1 / 7, rel=1e-12)


@pytest.mark.parametrize(
    "argv, code",
    [
        (["analytic"], 1),
        (["nonsense"], 1),
        (["analytic", "--spec", "exponential:1", "--bogus"], 1),
        ([], 1),
        (["analytic", "--spec", "foo:1"], 2),
        (["analytic", "--spec", "exponential:-1"], 2),
        (["analytic", "--spec", "exponential:1", "--alpha", "-1"], 2),
        (["analytic", "--spec", "pareto1:1,0.4"], 3),
        (["analytic", "--spec", "lognormal:0,1", "--method", "closed"], 3),
        (["simulate", "no_such_scenario"], 2),
        (["characterize", "--spec", "gpd:1,0.5", "--property", "linear", "--grid", "2:1:1"], 2),
        (["estimate", "/nonexistent/x", "/nonexistent/y"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err.strip()


def test_env_tolerance_override(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("RCRI_REL_TOL", "1e-11")
    man = tmp_path / "m.json"
    code, _, _ = run(capsys, "analytic", "--spec", "weibull:1,2", "--method", "quadrature", "--manifest", str(man))
    assert code == 0
    assert json.loads(man.read_text())["config"]["quadrature"]["rel_tol"] == 1e-11
    monkeypatch.setenv("RCRI_ABS_TOL", "tight")
    assert run(capsys, "analytic", "--spec", "exponential:1")[0] == 2


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["ok"] == "true" for r in rows)


def test_simulate_writes_five_rows_and_manifest(capsys, tmp_path):
    out = tmp_path / "t2.csv"
    code, _, _ = run(capsys, "simulate", "table2_exponential", "--replicates", "20", "--threads", "1", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["n"]) for r in rows] == [10, 20, 30, 40, 50]
    assert list(rows[0]) == ["scenario", "n", "bias", "mse", "truth"]
    man = json.loads((tmp_path / "t2.csv.manifest.json").read_text())
    assert man["subcommand"] == "simulate" and man["seeds"]["base_seed"] == 1729
    assert man["config"]["scenario_config"]["replicates"] == 20
    assert man["outputs"] == [str(out)]


def test_manifest_replay_is_byte_identical(capsys, tmp_path):
    first = tmp_path / "a.csv"
    assert run(capsys, "simulate", "table6", "--replicates", "5", "--threads", "2", "--out", str(first))[0] == 0
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    argv = list(man["argv"])
    second = tmp_path / "b.csv"
    argv[argv.index("--out") + 1] = str(second)
    argv[argv.index("--threads") + 1] = "1"
    assert run(capsys, *argv)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_simulate_scenario_file_and_normality(capsys, tmp_path):
    scen = tmp_path / "mine.txt"
    scen.write_text("spec_x=exponential:1\nspec_y=exponential:1\nn=20\nreplicates=3\nseed=4\n")
    code, out, _ = run(capsys, "simulate", str(scen), "--format", "json", "--threads", "1")
    assert code == 0 and json.loads(out)[0]["scenario"] == "mine"
    hist = tmp_path / "h.csv"
    code, out, _ = run(capsys, "simulate", str(scen), "--normality", "1000", "--histogram", str(hist), "--threads", "1")
    assert code == 0 and hist.read_text().startswith("z,density\n")
    assert code == 0 and len(out.splitlines()) == 2


def test_characterize(capsys):
    code, out, _ = run(capsys, "characterize", "--spec", "gpd:1,0.5", "--theta", "2", "--property", "linear")
    assert code == 0
    (row,) = csv.DictReader(io.StringIO(out))
    assert row["holds"] == "true" and len(row["t_grid"].split(";")) == 9
    code, out, _ = run(capsys, "characterize", "--spec", "weibull:1,3", "--property", "hazard", "--grid", "0.5,1,2")
    assert code == 0 and next(csv.DictReader(io.StringIO(out)))["holds"] == "false"


def test_photometry_default_fixture(capsys):
    code, out, _ = run(capsys, "photometry")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["f_band"], r["g_band"]) for r in rows] == [("G", "BP"), ("G", "RP"), ("BP", "RP")]
    assert all(r["bias"] == "" for r in rows)
    code, out, _ = run(capsys, "photometry", "--pairs", "G:BP", "--bootstrap", "20", "--seed", "2", "--method", "kernel")
    assert code == 0 and float(next(csv.DictReader(io.StringIO(out)))["mse"]) > 0


def test_photometry_reports_skips(capsys, tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("source_id,band,time,mag\ns,G,1,2\ns,G,2,3\ns,BP,1,4\ns,BP,2,oops\ns,BP,3,5\n")
    code, _, err = run(capsys, "photometry", "--input", str(path), "--pairs", "G:BP")
    assert code == 0 and "skipped 1" in err
    assert run(capsys, "photometry", "--input", str(path), "--source", "zz")[0] == 2


def test_estimate_from_files(capsys, tmp_path):
    x, y = tmp_path / "x.txt", tmp_path / "y.txt"
    x.write_text("# toy\n1\n2\n")
    y.write_text("1\n3\n")
    code, out, _ = run(capsys, "estimate", str(x), str(y))
    assert code == 0 and float(out.splitlines()[1]) == pytest.approx(1.0771527982316909, rel=1e-9)
    y.write_text("1\nthree\n")
    assert run(capsys, "estimate", str(x), str(y))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rcri", "analytic", "--spec", "exponential:2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "value\n0.25\n"
