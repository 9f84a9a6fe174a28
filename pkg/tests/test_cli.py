import csv
import json

import pytest

from srbrw.cli import main


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_dirichlet_command(tmp_path):
    assert main(["dirichlet", "--M", "3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "dirichlet.csv")
    assert rows[0] == ["generation", "node_index", "position", "increment"]
    assert len(rows) == 1 + 15
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["manifest_version"] == 1
    assert manifest["results"]["S_spr"] == pytest.approx(4.619047619047619)
    # 17 significant digits
    assert rows[2][2] == format(-1.1428571428571428, ".17g")


def test_dirichlet_cap(capsys):
    assert main(["dirichlet", "--M", "25"]) == 2
    assert "M exceeds cap" in capsys.readouterr().err


def test_trajectory_command(tmp_path):
    assert main(["trajectory", "--N", "9", "--beta", "1", "--eps", "1", "--K", "2", "--profile", "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())["results"]
    assert (m["K"], m["r"], m["d"]) == (2, 4, 123)
    assert set(m) >= {"S_total", "S_spr", "J"}
    occ = read_csv(tmp_path / "occupation.csv")
    final = [int(r[3]) for r in occ[1:] if r[0] == "9"]
    assert sum(final) == 512
    assert len(read_csv(tmp_path / "costs.csv")) == 10
    assert (tmp_path / "profile.csv").exists()


def test_trajectory_default_k_and_env_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SRBRW_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["trajectory", "--N", "12", "--beta", "1", "--eps", "1"]) == 0
    m = json.loads((tmp_path / "env" / "manifest.json").read_text())["results"]
    assert m["K"] == 3 and "r_star" in m


def test_trajectory_assumption_exit_code(capsys):
    assert main(["trajectory", "--N", "9", "--beta", "0.5", "--eps", "1"]) == 3
    assert "requires beta > eps^2/2" in capsys.readouterr().err


def test_trajectory_infeasible_k():
    assert main(["trajectory", "--N", "5", "--beta", "1", "--eps", "1", "--K", "3"]) == 2


def test_validate_command(capsys):
    assert main(["validate", "--suite", "oracle"]) == 0
    out = capsys.readouterr().out
    assert "oracle N=3 q=2" in out and "0 failed" in out


def test_validate_harmonicity_line(capsys):
    assert main(["validate", "--suite", "dirichlet"]) == 0
    assert "harmonicity residual M=16: PASS" in capsys.readouterr().out


def test_validate_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        main(["validate", "--suite", "nope"])
    assert exc.value.code == 2


def test_sample_command(tmp_path):
    assert main(["sample", "--N", "2", "--steps", "500", "--samples", "2000", "--thin", "50", "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert 0 < m["results"]["Z_hat"] <= 1
    assert m["parameters"]["seed"] == 0
    assert len(read_csv(tmp_path / "trace.csv")) == 11


def test_sample_reproducible(tmp_path):
    for d in ("a", "b"):
        main(["sample", "--N", "2", "--steps", "300", "--samples", "100", "--seed", "7", "--out", str(tmp_path / d)])
    assert (tmp_path / "a" / "trace.csv").read_text() == (tmp_path / "b" / "trace.csv").read_text()


def test_sample_cap(capsys):
    assert main(["sample", "--N", "9"]) == 2
    assert "sampler capped at N=8" in capsys.readouterr().err


def test_no_temp_files_left(tmp_path):
    main(["dirichlet", "--M", "2", "--out", str(tmp_path)])
    assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]
