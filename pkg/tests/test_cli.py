import json

import numpy as np
import pytest

from nsf import cli
from nsf.io import read_csv
from nsf.minprinciple import BoundSchedule
from nsf.plotting import PLOT_FILES
from nsf.scenarios import conduction_config, constant_config


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_cli(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture
def constant_run(tmp_path):
    out = tmp_path / "const"
    code = run_cli("run", write(tmp_path, constant_config(T_end=0.05)), "--out", out)
    return code, out


def test_constant_run(constant_run):
    code, out = constant_run
    assert code == 0
    diag = read_csv(out / "diagnostics.csv")
    assert np.all(diag["V_min"] > 0)
    mp_rows = read_csv(out / "minprinciple.csv")
    assert np.all(mp_rows["violations"] == 0)
    for name in ("trajectory.csv", "diagnostics.csv", "manifest.json", "config.ini",
                 *PLOT_FILES):
        assert (out / name).is_file()
    assert not (out / "status.json").exists()


def test_trajectory_csv_layout(constant_run):
    _, out = constant_run
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,rho,theta,u"
    # one row per cell per snapshot
    assert (len(lines) - 1) % 32 == 0


def test_manifest_lists_constants(constant_run):
    _, out = constant_run
    man = json.loads((out / "manifest.json").read_text())
    assert man["exit_status"] == 0
    for key in ("kappa_ratio_lo", "kappa_ratio_hi", "Lambda", "P_bar", "p_inf", "e_lo", "e_hi"):
        assert key in man["structural"]
    assert man["bound"]["M"] > 0 and man["bound"]["Y0"] == pytest.approx(19 / 48)
    assert man["constants"]["tol_violation"] == 1e-9
    assert set(man["files"]) >= {"trajectory.csv", "diagnostics.csv"}
    assert man["config"]["regularization"]["eps"] == 1e-3


def test_zero_bulk_viscosity_exit_4(tmp_path):
    out = tmp_path / "eta0"
    code = run_cli("run", write(tmp_path, "[transport]\neta = zero\n"), "--out", out)
    assert code == 4
    status = json.loads((out / "status.json").read_text())
    assert status["status"] == "hypothesis"
    assert not (out / "trajectory.csv").exists()


def test_config_error_exit_1(tmp_path, capsys):
    code = run_cli("run", write(tmp_path, "[transport]\nbeta = 5\n[regularization]\nGamma = 1\n"))
    assert code == 1
    err = capsys.readouterr().err
    assert "beta > 6" in err and "Gamma" in err


def test_blowup_exit_3(tmp_path):
    out = tmp_path / "blow"
    text = "[grid]\nn_cells = 16\n[initial]\nu = 1e160*sin(pi*x)\n[output]\nplots = false\n"
    code = run_cli("run", write(tmp_path, text), "--out", out)
    assert code == 3
    status = json.loads((out / "status.json").read_text())
    assert status["reason"] == "blowup"
    assert {"step", "t", "cell", "field"} <= set(status)


def test_violation_exit_2(tmp_path, monkeypatch):
    # a schedule whose bound sits above the data must be caught
    monkeypatch.setattr(cli, "make_schedule",
                        lambda sc, laws, th0, thb, variant: BoundSchedule(50.0, 0.0, laws))
    out = tmp_path / "viol"
    code = run_cli("run", write(tmp_path, constant_config(T_end=0.02)), "--out", out)
    assert code == 2
    rows = read_csv(out / "minprinciple.csv")
    assert np.all(rows["V_min"] < 0) and np.all(rows["violations"] > 0)


def test_conduction_with_oracle(tmp_path):
    text = conduction_config(n_cells=32, T_end=0.02, dt_max=2e-4, oracle=True)
    text += "oracle_intervals = 512\noracle_dt = 1e-4\n"
    out = tmp_path / "cond"
    assert run_cli("run", write(tmp_path, text), "--out", out) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["oracle"]["relative_max_discrepancy"] <= 1e-3
    oracle = read_csv(out / "oracle.csv")
    assert len(oracle["x"]) == 32


def test_sweep_rows(tmp_path, monkeypatch):
    monkeypatch.setenv("NSF_WORKERS", "2")
    text = conduction_config(n_cells=32, T_end=0.02, dt_max=1e-3)
    text += "[output]\nplots = false\n[sweep]\neps = 1e-2, 1e-3, 1e-4\ndelta = 1e-2, 1e-3\n"
    out = tmp_path / "sweep"
    assert run_cli("sweep", write(tmp_path, text), "--out", out) == 0
    rows = read_csv(out / "sweep_summary.csv")
    assert len(rows["eps"]) == 6
    assert np.all(rows["V_min"] > 0)
    assert set(rows["status"]) == {"ok"}


def test_sweep_empty_lists(tmp_path):
    assert run_cli("sweep", write(tmp_path, constant_config())) == 1


def test_sweep_aggregates_divergence(tmp_path, monkeypatch):
    monkeypatch.setenv("NSF_WORKERS", "1")
    text = ("[grid]\nn_cells = 16\n[initial]\nrho = 1 + 0.3*cos(pi*x)\n[time]\nT_end = 0.01\n"
            "[sweep]\ndelta = 0, 1e200\n")
    out = tmp_path / "div"
    code = run_cli("sweep", write(tmp_path, text), "--out", out)
    rows = read_csv(out / "sweep_summary.csv")
    assert list(rows["status"]) == ["ok", "blowup"]
    assert code == 3


def test_plot_regenerates(constant_run):
    _, out = constant_run
    for name in PLOT_FILES:
        (out / name).unlink()
    assert run_cli("plot", out) == 0
    for name in PLOT_FILES:
        text = (out / name).read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_plot_missing_artifact(tmp_path, constant_run, capsys):
    _, out = constant_run
    (out / "diagnostics.csv").unlink()
    assert run_cli("plot", out) == 1
    assert "diagnostics.csv" in capsys.readouterr().err


def test_bound_overlay_below_minimum(tmp_path):
    from nsf.scenarios import random_config
    out = tmp_path / "rnd"
    assert run_cli("run", write(tmp_path, random_config(3, n_cells=32, T_end=0.1)),
                   "--out", out) == 0
    diag = read_csv(out / "diagnostics.csv")
    assert np.all(diag["bound"] < diag["min_theta"])


def test_check_eos(tmp_path, capsys):
    assert run_cli("check-eos", write(tmp_path, "[eos]\nZ_bar = 1\n[mollify]\npoints = 200\n")) == 0
    text = capsys.readouterr().out
    assert "kappa_ratio_lo" in text and "sandwich" in text and "excess ratios" in text


def test_check_eos_flags_hypothesis(tmp_path):
    assert run_cli("check-eos", write(tmp_path, "[transport]\neta = zero\n")) == 4


def test_runs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, constant_config(T_end=0.02))
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("run", cfg, "--out", a)
    run_cli("run", cfg, "--out", b)
    for name in ("trajectory.csv", "diagnostics.csv", "minprinciple.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
