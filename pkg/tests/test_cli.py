import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ucfas.cli import main
from ucfas.logio import CSV_COLUMNS, decode_violations, read_csv, violation_mask

SHORT = """\
mode: track
initial_state: {{x: {x}}}
simulation: {{horizon: {horizon}, dt: 0.001, tail_window: 0.2}}
"""


def _write(tmp_path, text, name="exp.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_synthesize_writes_default_gains(tmp_path):
    assert main(["synthesize", "--config", "paper_defaults", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "gains.json").read_text())
    subs = doc["subsystems"]
    np.testing.assert_allclose(subs["z"]["A"], [20, 9], atol=1e-9)
    np.testing.assert_allclose(subs["psi"]["A"], [20, 9], atol=1e-9)
    np.testing.assert_allclose(subs["x"]["A"], [1680, 1066, 251, 26], atol=1e-9)
    assert subs["y"]["provenance"] == "synthesized"
    assert subs["y"]["F"] == np.diag([-5.0, -6, -7, -8]).tolist()
    np.testing.assert_allclose(subs["x"]["closed_loop_eigenvalues"], [-8, -7, -6, -5], atol=1e-8)
    assert not (tmp_path / "trajectory.csv").exists()


def test_track_short_run_outputs(tmp_path):
    cfg = _write(tmp_path, SHORT.format(x=0.5, horizon=0.5))
    assert main(["track", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = tmp_path / "o"
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 1 + 501
    cols = read_csv(out / "trajectory.csv")
    assert cols["t"][-1] == 0.5
    assert cols["x"][0] == 0.5 and cols["x_ref"][0] == 1.0
    assert (out / "plot_tracking.py").exists()

    summary = json.loads((out / "summary.json").read_text())
    # recompute every statistic from the CSV alone
    tail = cols["t"] >= 0.5 - 0.2 - 1e-12
    for axis, ref in (("x", "x_ref"), ("y", "y_ref"), ("z", "z_ref"), ("psi", "psi_ref")):
        e = cols[axis] - cols[ref]
        assert summary["rmse_tail"][axis] == math.sqrt(np.mean(e[tail] ** 2))
        assert summary["max_error"][axis] == np.abs(e).max()
    assert summary["saturation_events"] == int(cols["saturated"].sum())
    assert summary["feasibility_violation_events"] == int(np.count_nonzero(cols["violations"]))
    assert summary["samples"] == 501 and summary["aborted"] is None


def test_csv_round_trips_floats(tmp_path):
    cfg = _write(tmp_path, SHORT.format(x=0.5, horizon=0.05))
    main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    text = (tmp_path / "trajectory.csv").read_text().splitlines()
    for row in text[1:]:
        for field in row.split(",")[:-2]:
            assert repr(float(field)) == field or float(repr(float(field))) == float(field)


def test_simulate_mode_regulates_to_setpoint(tmp_path):
    cfg = _write(tmp_path, "setpoint: {z: 0.2, psi: 0.1, X: [0.1, -0.1]}\nsimulation: {horizon: 4.0}\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    cols = read_csv(tmp_path / "trajectory.csv")
    np.testing.assert_allclose([cols["x"][-1], cols["y"][-1], cols["z"][-1], cols["psi"][-1]],
                               [0.1, -0.1, 0.2, 0.1], atol=1e-4)
    assert np.all(cols["z_ref_dot"] == 0.0)


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "actuator_limits:\n  T_min: 10\n  T_max: 5\n", "bad.yaml")
    assert main(["track", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "bad.yaml:3:" in err and "T_max" in err
    assert main(["track", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_runtime_singularity_exit_code_and_partial_log(tmp_path, capsys):
    cfg = _write(tmp_path, SHORT.format(x=20.0, horizon=3.0))
    assert main(["track", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "aborted" in capsys.readouterr().err
    cols = read_csv(tmp_path / "trajectory.csv")
    assert 0 < len(cols["t"]) < 3001
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["aborted"]["time"] >= cols["t"][-1]
    assert summary["samples"] == len(cols["t"])


def test_roea_mode(tmp_path):
    cfg = _write(tmp_path, "constraints: {u1: [-0.5, 0.5]}\nroea: {subsystem: psi, points: 5}\n")
    assert main(["roea", "--config", cfg, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "roea.json").read_text())
    assert doc["samples"] == 25
    assert len(doc["samples_detail"]) == 25
    assert doc["counts"]["member"] + doc["counts"]["non-member"] + doc["counts"]["marginal"] == 25


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ucfas.cli", "synthesize", "--config", "paper_defaults",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "ucfas.cli", "fly", "--config", "x"], capture_output=True)
    assert res.returncode == 2


def test_violation_mask_round_trip():
    names = ["u0_dot", "u2_2", "infeasible"]
    assert decode_violations(violation_mask(names)) == names
    assert violation_mask([]) == 0
