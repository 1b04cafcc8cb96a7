import csv
import io
import json
import os
import subprocess
import sys

import pytest

from kswave import cli
from kswave.errors import ConfigError
from kswave.model import AffineChi, ConstantChi, TabulatedChi


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
    return tmp_path


def _run_dir(root, command):
    dirs = [d for d in root.iterdir() if d.name.startswith(command + "-")]
    assert len(dirs) == 1
    return dirs[0]


@pytest.mark.parametrize("tok, mu, expected", [("0.5", None, 0.5), ("mu", 2.0, 2.0),
                                               ("mu/2", 3.0, 1.5), ("0.25*mu", 4.0, 1.0)])
def test_parse_scalar(tok, mu, expected):
    assert cli.parse_scalar(tok, mu) == pytest.approx(expected)


def test_parse_scalar_rejects_garbage():
    with pytest.raises(ConfigError):
        cli.parse_scalar("mu**2", 1.0)


def test_parse_chi_variants(tmp_path):
    assert cli.parse_chi("const:mu/2", 1.0) == ConstantChi(0.5)
    assert cli.parse_chi("affine:0.1,0.2") == AffineChi(0.1, 0.2)
    table = tmp_path / "chi.csv"
    table.write_text("0,0.1\n1,0.3\n")
    assert cli.parse_chi(f"table:{table}") == TabulatedChi(((0.0, 0.1), (1.0, 0.3)))
    with pytest.raises(ConfigError):
        cli.parse_chi("cubic:1")


def test_speed_json(capsys):
    assert cli.main(["speed", "--mu", "1", "--beta", "4", "--D", "1", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["c_star"] == 4.0 and rep["binding"] == "Chemical"


def test_speed_text(capsys):
    assert cli.main(["speed", "--mu", "1", "--beta", "1", "--D", "0"]) == 0
    assert "c* = 2" in capsys.readouterr().out


def test_speed_rejects_negative_rate(capsys):
    assert cli.main(["speed", "--mu", "-1", "--beta", "1"]) == 2
    assert "NonPositiveRate" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": 4.0, "beta": 1.0, "D": 0.0}))
    assert cli.main(["speed", "--config", str(cfg), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["c_star"] == 4.0
    assert cli.main(["speed", "--config", str(cfg), "--mu", "1", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["c_star"] == 2.0


def test_shoot_writes_profile_and_manifest(out):
    assert cli.main(["shoot", "--mu", "1", "--beta", "1", "--chi", "const:0", "--c", "2.5"]) == 0
    d = _run_dir(out, "shoot")
    outcome = json.loads((d / "outcome.json").read_text())
    assert outcome["kind"] == "ConvergedToOrigin"
    header = (d / "profile.csv").read_text().splitlines()[0]
    assert header == "xi,U,V,Y,W"
    man = json.loads((d / "manifest.json").read_text())
    assert man["status"] == "ok" and man["outputs"]


def test_shoot_speed_expression(out):
    assert cli.main(["shoot", "--mu", "1", "--beta", "1", "--c", "cstar+0.5"]) == 0
    d = _run_dir(out, "shoot")
    assert json.loads((d / "outcome.json").read_text())["c"] == 2.5


def test_minspeed_reports_both_values(out, capsys):
    assert cli.main(["minspeed", "--mu", "1", "--beta", "1", "--chi", "const:0",
                     "--tol", "1e-2", "--bracket", "1", "4"]) == 0
    res = json.loads((_run_dir(out, "minspeed") / "minspeed.json").read_text())
    assert abs(res["c_star_empirical"] - 2.0) < 0.02 and res["c_star_closed"] == 2.0


def test_minspeed_bad_bracket(out):
    assert cli.main(["minspeed", "--mu", "1", "--beta", "1", "--bracket", "3", "4"]) == 2


def test_trapcheck_4d_passes(out):
    assert cli.main(["trapcheck", "--mu", "1", "--beta", "1", "--D", "1", "--c", "4",
                     "--samples", "10000"]) == 0
    rep = json.loads((_run_dir(out, "trapcheck") / "trapcheck.json").read_text())
    faces = {r["face"]: r for r in rep["faces"]}
    assert all(r["worst_margin"] >= -1e-12 for f, r in faces.items() if f != "W0")


@pytest.mark.parametrize("eta, code", [("half", 0), ("five-eighths", 3)])
def test_surface_exit_codes(out, eta, code):
    assert cli.main(["surface", "--mu", "1", "--beta", "1", "--chi", "const:mu",
                     "--eta", eta]) == code
    rep = json.loads((_run_dir(out, "surface") / "surface.json").read_text())
    if code == 3:
        assert rep["worst_value"] == pytest.approx(0.0625, abs=1e-12)


def test_simulate_outputs(out):
    assert cli.main(["simulate", "--mu", "1", "--beta", "1", "--L", "40", "--n", "200",
                     "--t-end", "3", "--snapshot-every", "1", "--window", "1", "3"]) == 0
    d = _run_dir(out, "simulate")
    assert (d / "monitors.csv").exists() and (d / "front.svg").exists()
    snaps = sorted((d / "snapshots").glob("*.csv"))
    assert len(snaps) == 4
    assert snaps[0].read_text().splitlines()[0] == "x,u,v"


def test_sweep_rows_and_schema(out):
    assert cli.main(["sweep", "--mu", "1", "0.25", "--beta", "1", "--D", "0",
                     "--chi", "const:0", "const:mu", "--tol", "1e-2"]) == 0
    d = _run_dir(out, "sweep")
    rows = list(csv.DictReader(io.StringIO((d / "sweep.csv").read_text())))
    assert tuple(rows[0].keys()) == cli.SWEEP_COLUMNS
    assert [(r["mu"], r["chi_id"]) for r in rows] == [("1.0", "const:0"), ("1.0", "const:mu"),
                                                      ("0.25", "const:0"), ("0.25", "const:mu")]
    for r in rows:
        assert float(r["abs_err"]) <= 0.02 * float(r["c_star_closed"])
    assert json.loads((d / "manifest.json").read_text())["csv_schema_version"] == 1


def test_sweep_empty_axis(out):
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--mu", "--beta", "1", "--D", "0"])
    assert cli.main(["sweep", "--beta", "1", "--D", "0"]) == 2


def test_sweep_parallel_matches_serial():
    tasks = cli.sweep_tasks({"mu": [1.0], "beta": [1.0, 2.0], "D": [0.0], "chi": ["const:0"]},
                            1e-2)
    assert cli.run_sweep(tasks, jobs=2) == cli.run_sweep(tasks, jobs=1)


def test_console_entry_point():
    env = dict(os.environ)
    res = subprocess.run([sys.executable, "-m", "kswave.cli", "speed", "--mu", "2.25", "--json"],
                         capture_output=True, text=True, env=env, check=True)
    assert json.loads(res.stdout)["c_star"] == 3.0
