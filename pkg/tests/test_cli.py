"""Command-line interface: subcommands, config files, exit codes."""

import os

import numpy as np
import pytest

from singfem.cli import main, read_config_file


def test_mesh_subcommand_writes_and_audits(tmp_path, capsys):
    out = tmp_path / "m.mesh"
    code = main(
        [
            "mesh",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.3",
            "--h",
            "0.0625",
            "--out",
            str(out),
            "--outdir",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert out.exists()
    text = capsys.readouterr().out
    assert "N=856" in text
    assert "validation: ok" in text
    assert "violations 0" in text


def test_mesh_invalid_mu_is_config_error(tmp_path):
    code = main(["mesh", "--mu", "0", "--outdir", str(tmp_path)])
    assert code == 2


def test_solve_subcommand_reports_errors(tmp_path, capsys):
    code = main(
        [
            "solve",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.4",
            "--h",
            "0.0625",
            "--beta",
            "0.4",
            "--vtk",
            str(tmp_path / "u.vtk"),
            "--outdir",
            str(tmp_path),
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "err_L2 " in text
    assert "err_L2_beta=0.4" in text
    assert (tmp_path / "u.vtk").exists()


def test_solve_round_trips_through_mesh_file(tmp_path, capsys):
    mesh_path = tmp_path / "m.mesh"
    args = [
        "--problem",
        "point2d",
        "--strategy",
        "rescaled",
        "--mu",
        "0.4",
        "--h",
        "0.0625",
        "--outdir",
        str(tmp_path),
    ]
    assert main(["mesh", *args, "--out", str(mesh_path)]) == 0
    capsys.readouterr()
    assert main(["solve", *args, "--beta", "0.4"]) == 0
    direct = capsys.readouterr().out
    assert main(["solve", *args, "--beta", "0.4", "--mesh-in", str(mesh_path)]) == 0
    reloaded = capsys.readouterr().out

    def errs(text):
        return [float(line.rsplit("=", 1)[1]) for line in text.splitlines() if line.strip().startswith("err_")]

    a, b = errs(direct), errs(reloaded)
    assert len(a) == 2
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_study_subcommand_csv_determinism(tmp_path, capsys):
    args = [
        "study",
        "--problem",
        "point2d",
        "--strategy",
        "rescaled",
        "--mu",
        "0.4",
        "--levels",
        "0.0625,0.03125",
        "--beta",
        "0.4",
        "--outdir",
        str(tmp_path),
    ]
    assert main([*args, "--name", "s1"]) == 0
    assert main([*args, "--name", "s2"]) == 0
    capsys.readouterr()

    def stable(name):
        rows = (tmp_path / f"{name}.csv").read_text().strip().splitlines()
        return [",".join(r.split(",")[:-1]) for r in rows]

    assert stable("s1") == stable("s2")


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "study.cfg"
    cfg.write_text(
        "# demo study\n"
        "problem=point2d\n"
        "strategy=rescaled\n"
        "mu=0.4\n"
        "levels=0.0625,0.03125\n"
        "beta=0.4\n"
    )
    code = main(
        [
            "study",
            "--config",
            str(cfg),
            "--mu",
            "0.5",  # overrides the file
            "--outdir",
            str(tmp_path),
            "--name",
            "over",
        ]
    )
    assert code == 0
    assert "mu=0.5" in capsys.readouterr().out


def test_config_file_parser(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("a-key = 1  # comment\n\n# full comment line\nother=x y\n")
    values = read_config_file(cfg)
    assert values == {"a_key": "1", "other": "x y"}


def test_config_file_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this is not a key value line\n")
    code = main(["study", "--config", str(bad), "--outdir", str(tmp_path)])
    assert code == 2


def test_unknown_config_key_rejected(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("banana=1\n")
    code = main(["study", "--config", str(bad), "--outdir", str(tmp_path)])
    assert code == 2


def test_outdir_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SINGFEM_OUTDIR", str(tmp_path))
    code = main(
        [
            "study",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.4",
            "--levels",
            "0.0625",
            "--name",
            "envtest",
        ]
    )
    assert code == 0
    assert (tmp_path / "envtest.csv").exists()


def test_check_mu_pass_and_fail(capsys):
    assert main(["check-mu", "--n", "2", "--m", "0", "--norm", "l2", "--beta", "0.4", "--mu", "0.4"]) == 0
    assert "pass" in capsys.readouterr().out
    assert main(["check-mu", "--n", "2", "--m", "0", "--norm", "l2", "--beta", "0.4", "--mu", "0.9"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_check_mu_no_theorem(capsys):
    code = main(["check-mu", "--n", "3", "--m", "1", "--mesh-kind", "anisotropic", "--norm", "l2", "--beta", "0"])
    assert code == 0
    assert "no theorem" in capsys.readouterr().out


def test_check_mu_energy_needs_sigma():
    assert main(["check-mu", "--n", "2", "--m", "0", "--norm", "energy"]) == 2


def test_matrix_market_export(tmp_path, capsys):
    import scipy.io

    code = main(
        [
            "solve",
            "--problem",
            "point2d",
            "--strategy",
            "rescaled",
            "--mu",
            "0.4",
            "--h",
            "0.125",
            "--matrix-out",
            str(tmp_path / "A.mtx"),
            "--rhs-out",
            str(tmp_path / "b.mtx"),
            "--outdir",
            str(tmp_path),
        ]
    )
    assert code == 0
    A = scipy.io.mmread(tmp_path / "A.mtx")
    b = np.asarray(scipy.io.mmread(tmp_path / "b.mtx")).ravel()
    assert A.shape[0] == A.shape[1] == len(b)
    assert b.sum() == pytest.approx(1.0, abs=1e-12)
