import csv
import json
import math
import subprocess
import sys

import pytest

from canonmoments.cli import main


def _run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


def test_bracket_examples(capsys):
    assert _run(["bracket", "q2", "pi2", "--order", "2"], capsys)[:2] == (0, "4*qpi")
    assert _run(["bracket", "q3", "pi3", "--order", "3"], capsys)[:2] == (0, "0")


def test_bracket_oracle_and_two_dof(capsys):
    code, out, _ = _run(["bracket", "q1q2", "pi1^2", "--dof", "2"], capsys)
    assert code == 0 and out == "2*q2pi1"
    code, out, _ = _run(["bracket", "q2", "pi2", "--oracle"], capsys)
    assert code == 0 and out == "4*qpi"


def test_malformed_index_is_usage_error(capsys):
    code, _, err = _run(["bracket", "q-1", "pi2"], capsys)
    assert code == 2
    assert "q-1" in err


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2


def test_ground(capsys):
    code, out, _ = _run(["ground", "--potential", "abs", "--U", "0.25"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["q"] == 0.0
    assert data["s"] == pytest.approx(0.63, abs=0.01)
    assert data["E"] == pytest.approx(0.94, abs=0.01)
    assert data["exact"] == pytest.approx(0.81, abs=0.01)


def test_effpot_coupled_oscillator(capsys):
    code, out, _ = _run(["effpot", "--coupled-oscillator", "--gamma", "0.5"], capsys)
    assert code == 0
    assert json.loads(out)["E"] == pytest.approx(0.5 * (math.sqrt(1.5) + math.sqrt(0.5)), abs=1e-9)


def test_effpot_numerical_failure(capsys):
    code, _, err = _run(["effpot", "--V11", "1", "--V22", "1", "--V12", "2"], capsys)
    assert code == 1
    assert "NotPositiveDefinite" in err


def test_thermo_row_and_manifest(tmp_path, capsys):
    code, out, _ = _run(["thermo", "--beta", "1", "--omega", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    row = json.loads(out)
    assert abs(row["dZ_rel"]) < 1e-9 and abs(row["dE"]) < 1e-9
    with open(tmp_path / "thermo.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["Z"]) == pytest.approx(row["Z"])
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["parameters"]["beta"] == 1.0
    assert "numpy" in manifest["versions"]
    assert manifest["files"] == ["thermo.csv"]


def test_tunnel_from_toml(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('V_top = 1.0\ngamma = 0.1\nU = 0.25\nt_max = 5.0\nsweep_param = "gamma"\nsweep_values = [0.1, 0.15]\n')
    out = tmp_path / "out"
    code, _, _ = _run(["tunnel", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 0
    events = json.loads((out / "events.json").read_text())
    assert events["status"] == "escape"
    assert events["events"][0]["kind"] == "escape"
    with open(out / "trajectory.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "q", "pi", "s", "p", "U", "E"]
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["param"]) for r in rows] == [0.1, 0.15]


def test_tunnel_missing_key(capsys):
    code, _, err = _run(["tunnel", "--V-top", "1", "--U", "0.25"], capsys)
    assert code == 2
    assert "gamma" in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"beta": 1.0, "bogus": 2}))
    code, _, err = _run(["thermo", "--config", str(cfg)], capsys)
    assert code == 2
    assert "bogus" in err


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"beta": 5.0, "omega": 2.0, "quadrature": False}))
    code, out, _ = _run(["thermo", "--config", str(cfg), "--beta", "2", "--out", str(tmp_path / "o")], capsys)
    row = json.loads(out)
    assert code == 0 and row["beta"] == 2.0 and row["omega"] == 2.0


def test_reconstruct(tmp_path, capsys):
    code, _, _ = _run(["reconstruct", "--gaussian-k", "1.3", "--N", "12", "--out", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "reconstruction.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["q", "density", "dalpha_dq", "alpha"]
    assert float(rows[400]["dalpha_dq"]) == pytest.approx(1.3, abs=1e-9)


def test_reconstruct_from_moment_file(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"a": [1.0, 0.0, 0.5, 0.0, 0.75], "N": 4}))
    code, out, _ = _run(["reconstruct", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert json.loads(out)["hankel_ok"] is True


def test_realize(capsys):
    code, out, _ = _run(["realize", "order2", "--point", '{"s": 2, "p": 0.5, "U": 1}'], capsys)
    assert code == 0
    assert json.loads(out)["moments"]["q2"] == 4.0
    code, _, _ = _run(["realize", "order2", "--point", '{"s": 2}'], capsys)
    assert code == 2


def test_outputs_are_bit_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["thermo", "--beta", "0.7", "--omega", "1.3", "--distances", "0.5,1", "--out", str(tmp_path / d)]) == 0
    capsys.readouterr()
    for name in ("thermo.csv", "two_point.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "canonmoments", "bracket", "q2", "pi2", "--order", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "4*qpi"
