"""CSV/summary serialization of trajectory logs and plot-script emission."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .control import ERROR_LOG_FIELDS, REFERENCE_LOG_FIELDS, VIRTUAL_LOG_FIELDS
from .plant import INPUT_FIELDS, STATE_FIELDS, TrajectoryLog

VIOLATION_BITS = ("u0", "u0_dot", "u0_ddot", "u1", "u2_1", "u2_2", "infeasible")

CSV_COLUMNS = (
    ("t",)
    + STATE_FIELDS
    + REFERENCE_LOG_FIELDS
    + tuple(f"{n}_raw" for n in INPUT_FIELDS)
    + INPUT_FIELDS
    + VIRTUAL_LOG_FIELDS
    + ERROR_LOG_FIELDS
    + ("saturated", "violations")
)

# Columns the emitted plot script reads.
PLOT_COLUMNS = ("t", "x", "y", "z", "phi", "theta", "psi", "x_ref", "y_ref", "z_ref", "psi_ref")


def violation_mask(names) -> int:
    mask = 0
    for n in names:
        mask |= 1 << VIOLATION_BITS.index(n)
    return mask


def decode_violations(mask: int) -> list[str]:
    return [n for i, n in enumerate(VIOLATION_BITS) if mask >> i & 1]


def log_table(log: TrajectoryLog) -> np.ndarray:
    n = len(log)
    return np.column_stack(
        [
            log.t[:n],
            log.states[:n],
            log.reference[:n],
            log.raw_inputs[:n],
            log.inputs[:n],
            log.virtual[:n],
            log.errors[:n],
            log.saturated[:n].astype(float),
            np.array([violation_mask(v) for v in log.violations[:n]], dtype=float),
        ]
    )


def write_csv(log: TrajectoryLog, path) -> None:
    """17 significant digits per float, so values survive a text round trip."""
    table = log_table(log)
    float_fmt = ",".join(["%.17g"] * (len(CSV_COLUMNS) - 2))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in table:
            fh.write(float_fmt % tuple(row[:-2]))
            fh.write(",%d,%d\n" % (int(row[-2]), int(row[-1])))


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _rmse(e: np.ndarray) -> float:
    return float(math.sqrt(np.mean(e * e))) if e.size else float("nan")


def _max_abs(e: np.ndarray) -> float:
    return float(np.max(np.abs(e))) if e.size else float("nan")


def summarize(columns: dict[str, np.ndarray], tail_window: float) -> dict:
    """Summary statistics computed from CSV columns only."""
    t = columns["t"]
    n = len(t)
    t_end = float(t[-1]) if n else 0.0
    tail = t >= t_end - tail_window - 1e-12 if n else np.zeros(0, dtype=bool)
    err = {
        "x": columns["x"] - columns["x_ref"],
        "y": columns["y"] - columns["y_ref"],
        "z": columns["z"] - columns["z_ref"],
        "psi": columns["psi"] - columns["psi_ref"],
    }
    masks = columns["violations"].astype(np.int64)
    violated = masks != 0
    by_constraint = {name: int(np.count_nonzero(masks >> i & 1)) for i, name in enumerate(VIOLATION_BITS)}
    vt = t[violated]
    return {
        "samples": n,
        "t_end": t_end,
        "tail_window": [t_end - tail_window, t_end],
        "rmse_tail": {k: _rmse(v[tail]) for k, v in err.items()},
        "max_error": {k: _max_abs(v) for k, v in err.items()},
        "max_error_tail": {k: _max_abs(v[tail]) for k, v in err.items()},
        "max_position_error_norm": _max_abs(columns["pos_err"]) if n else float("nan"),
        "saturation_events": int(np.count_nonzero(columns["saturated"])),
        "feasibility_violation_events": int(np.count_nonzero(violated)),
        "violations_by_constraint": by_constraint,
        "first_violation_time": float(vt[0]) if vt.size else None,
        "last_violation_time": float(vt[-1]) if vt.size else None,
    }


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


class HeaderMismatchError(ValueError):
    pass


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Plots for {csv_name}: 3-D path vs reference and six attitude/position panels.

Generated by ucfas; run with `python3 {script_name}`.
"""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
CSV_PATH = os.path.join(HERE, {csv_rel!r}) if not os.path.isabs({csv_rel!r}) else {csv_rel!r}
OUT_3D = os.path.join(HERE, {out_3d!r})
OUT_TS = os.path.join(HERE, {out_ts!r})
STRIDE = {stride}

cols = {{}}
with open(CSV_PATH, newline="") as fh:
    reader = csv.reader(fh)
    header = next(reader)
    idx = {{name: i for i, name in enumerate(header)}}
    need = {columns!r}
    missing = [c for c in need if c not in idx]
    if missing:
        sys.exit("missing columns: " + ", ".join(missing))
    for c in need:
        cols[c] = []
    for k, row in enumerate(reader):
        if k % STRIDE:
            continue
        for c in need:
            cols[c].append(float(row[idx[c]]))

fig = plt.figure(figsize=(7, 6))
ax = fig.add_subplot(projection="3d")
ax.plot(cols["x_ref"], cols["y_ref"], cols["z_ref"], "r--", label="reference")
ax.plot(cols["x"], cols["y"], cols["z"], "b-", label="quadrotor")
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.set_zlabel("z [m]")
ax.legend()
fig.tight_layout()
fig.savefig(OUT_3D, dpi=120)

fig, axes = plt.subplots(3, 2, figsize=(10, 8), sharex=True)
panels = [("x", "x_ref", "x [m]"), ("phi", None, "phi [rad]"),
          ("y", "y_ref", "y [m]"), ("theta", None, "theta [rad]"),
          ("z", "z_ref", "z [m]"), ("psi", "psi_ref", "psi [rad]")]
for a, (name, ref, label) in zip(axes.ravel(), panels):
    a.plot(cols["t"], cols[name], "b-", label=name)
    if ref is not None:
        a.plot(cols["t"], cols[ref], "r--", label=ref)
    a.set_ylabel(label)
    a.grid(True, alpha=0.3)
for a in axes[-1]:
    a.set_xlabel("t [s]")
fig.tight_layout()
fig.savefig(OUT_TS, dpi=120)
'''


def emit_plot_script(log_csv_path, out_path, *, stride: int = 10) -> Path:
    """Write a standalone matplotlib script that renders the tracking figures.

    The script writes ``<stem>_3d.png`` and ``<stem>_timeseries.png`` next to
    itself. Raises :class:`HeaderMismatchError` if the CSV lacks a plotted column.
    """
    log_csv_path = Path(log_csv_path)
    out_path = Path(out_path)
    with open(log_csv_path, newline="") as fh:
        header = next(csv.reader(fh), [])
    missing = [c for c in PLOT_COLUMNS if c not in header]
    if missing:
        raise HeaderMismatchError(
            f"{log_csv_path}: missing columns {missing}; expected at least {list(PLOT_COLUMNS)}"
        )
    try:
        csv_rel = str(log_csv_path.resolve().relative_to(out_path.parent.resolve()))
    except ValueError:
        csv_rel = str(log_csv_path.resolve())
    stem = out_path.stem
    out_path.write_text(
        _PLOT_TEMPLATE.format(
            csv_name=log_csv_path.name,
            script_name=out_path.name,
            csv_rel=csv_rel,
            out_3d=f"{stem}_3d.png",
            out_ts=f"{stem}_timeseries.png",
            stride=max(1, int(stride)),
            columns=list(PLOT_COLUMNS),
        )
    )
    return out_path
