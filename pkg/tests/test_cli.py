import csv
import json
import math

import numpy as np
import pytest
import scipy.sparse as sp

from ckspectral import cli, formats
from ckspectral.markov import AdjacencyMatrix


def _run(tmp_path, *args):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_matrix_readers(tmp_path):
    (tmp_path / "a.txt").write_text("# golden mean\n2\n1 1\n1 0\n")
    (tmp_path / "b.txt").write_text("3\n111\n110\n011\n")
    (tmp_path / "c.json").write_text(json.dumps({"n": 2, "matrix": [[1, 1], [1, 0]]}))
    assert np.array_equal(formats.read_matrix(tmp_path / "a.txt").entries, [[1, 1], [1, 0]])
    assert formats.read_matrix(tmp_path / "b.txt").n == 3
    assert formats.read_matrix(tmp_path / "c.json").n == 2
    with pytest.raises(ValueError):
        formats.parse_matrix_text("2\n1 1\n")
    with pytest.raises(ValueError):
        formats.parse_matrix_text("x\n1\n")


def test_writers_round_trip(tmp_path):
    rows = [{"word": (1, 2), "x": 0.1, "flag": True, "none": None}]
    path = formats.write_csv(tmp_path / "t.csv", rows)
    got = list(csv.DictReader(path.open()))
    assert got[0]["word"] == "12" and float(got[0]["x"]) == 0.1 and got[0]["none"] == ""
    assert formats.format_float(0.1) == "0.10000000000000001"
    m = sp.csr_matrix(np.array([[0, 1j], [2.5, 0]]))
    text = formats.write_sparse_triplets(tmp_path / "m.txt", m).read_text().splitlines()
    assert text[1:] == ["0 1 0 1", "1 0 2.5 0"]
    rep = formats.write_json(tmp_path / "r.json", {"a": np.float64(1 / 3), "w": (2, 1), "z": 1 + 2j})
    data = json.loads(rep.read_text())
    assert data["a"] == 1 / 3 and data["w"] == "21" and data["z"] == {"re": 1.0, "im": 2.0}


def test_pf_command(tmp_path, capsys):
    assert _run(tmp_path, "pf", "--preset", "golden", "--depth", "4") == 0
    rep = json.loads((tmp_path / "pf.json").read_text())
    assert rep["lambda_max"] == pytest.approx((1 + 5 ** 0.5) / 2)
    assert "PASS" in capsys.readouterr().out
    assert (tmp_path / "measure.csv").exists()


def test_bad_inputs_exit_2(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n0 1\n1 0\n")
    assert _run(tmp_path, "pf", "--matrix", str(bad)) == 2
    assert _run(tmp_path, "pf", "--matrix", str(tmp_path / "missing.txt")) == 2
    assert _run(tmp_path, "heat", "--L", "0") == 2
    assert _run(tmp_path, "pf", "--lambda", "0.5") == 2
    with pytest.raises(SystemExit):
        cli.main(["nope"])


def test_spectrum_command(tmp_path):
    assert _run(tmp_path, "spectrum", "--preset", "free2", "--depth", "4") == 0
    rows = list(csv.DictReader((tmp_path / "spectrum.csv").open()))
    assert rows and all(float(r["abs_error"]) < 1e-9 for r in rows)


def test_heat_command_flags_pole(tmp_path):
    t0 = repr(2 * math.log(2))
    assert _run(tmp_path, "heat", "--t", f"1.5,{t0},3", "--L", "2") == 0
    rows = list(csv.DictReader((tmp_path / "heat_kernel.csv").open()))
    assert [r["status"] for r in rows] == ["ok", "pole", "ok"]


def test_operators_command(tmp_path):
    assert _run(tmp_path, "operators", "--preset", "golden", "--L", "3") == 0
    rep = json.loads((tmp_path / "operators.json").read_text())
    assert rep["ck_interior_residual"] < 1e-12 and rep["dirac_identity_error"] == 0
    assert (tmp_path / "dirac.txt").exists() and (tmp_path / "manifest.csv").exists()


def test_isometry_command_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["isometry", "--preset", "full3", "--L", "2", "--out", str(a)]) == 0
    assert cli.main(["isometry", "--preset", "full3", "--L", "2", "--out", str(b)]) == 0
    assert (a / "isometry.json").read_bytes() == (b / "isometry.json").read_bytes()
    rep = json.loads((a / "isometry.json").read_text())
    assert rep["aut_order"] == 6 and rep["random_unitary"]["in_G_A"]


def test_config_files(tmp_path):
    (tmp_path / "c.toml").write_text('preset = "golden"\nL = 2\nt = [0.5, 1.0]\nlambda = "max"\n')
    cfg = cli.load_config(tmp_path / "c.toml", {"L": 3})
    assert cfg.L == 3 and cfg.t == (0.5, 1.0) and cfg.lam is None
    (tmp_path / "c.json").write_text(json.dumps({"preset": "full2", "depth": 5}))
    assert cli.load_config(tmp_path / "c.json").depth == 5
    (tmp_path / "bad.json").write_text(json.dumps({"colour": 1}))
    with pytest.raises(cli.InputError):
        cli.load_config(tmp_path / "bad.json")
    assert cli.main(["pf", "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path / "o")]) == 0


def test_failing_check_exits_1(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "SPECTRUM_TOL", -1.0)
    assert _run(tmp_path, "spectrum", "--preset", "golden", "--depth", "3") == 1
