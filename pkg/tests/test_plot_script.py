import subprocess
import sys

import pytest

from ucfas.logio import CSV_COLUMNS, HeaderMismatchError, emit_plot_script

pytest.importorskip("matplotlib")


def _csv(path, columns, rows=()):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")


def _run(script):
    return subprocess.run([sys.executable, str(script)], capture_output=True, text=True, timeout=120)


def test_script_renders_two_images(tmp_path):
    rows = [[0.01 * k if c == "t" else 0.1 * k for c in CSV_COLUMNS] for k in range(50)]
    _csv(tmp_path / "log.csv", CSV_COLUMNS, rows)
    script = emit_plot_script(tmp_path / "log.csv", tmp_path / "plots.py")
    res = _run(script)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "plots_3d.png").stat().st_size > 0
    assert (tmp_path / "plots_timeseries.png").stat().st_size > 0


def test_header_only_log(tmp_path):
    _csv(tmp_path / "log.csv", CSV_COLUMNS)
    script = emit_plot_script(tmp_path / "log.csv", tmp_path / "p.py")
    res = _run(script)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "p_3d.png").exists() and (tmp_path / "p_timeseries.png").exists()


def test_missing_column_is_reported(tmp_path):
    _csv(tmp_path / "log.csv", [c for c in CSV_COLUMNS if c != "psi_ref"])
    with pytest.raises(HeaderMismatchError) as info:
        emit_plot_script(tmp_path / "log.csv", tmp_path / "p.py")
    msg = str(info.value)
    assert "psi_ref" in msg and "x_ref" in msg  # names the gap and lists what is expected
    assert not (tmp_path / "p.py").exists()


def test_csv_outside_script_dir(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    _csv(tmp_path / "a" / "log.csv", CSV_COLUMNS, [[0.0] * len(CSV_COLUMNS)])
    script = emit_plot_script(tmp_path / "a" / "log.csv", tmp_path / "b" / "p.py")
    assert _run(script).returncode == 0
