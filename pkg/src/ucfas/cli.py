"""Command-line experiment runner.

    ucfas synthesize|simulate|track|roea --config <path-or-builtin> [--out <dir>]

Exit status: 0 on success, 2 on a configuration error, 3 when a run aborts on
singular kinematics or loss of full actuation (the partial log is still written).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import MODES, ConfigError, ExperimentConfig, load_config
from .control import ControllerGains, TrackingController
from .feasibility import GridSampling, UniformSampling, estimate_roea
from .logio import emit_plot_script, read_csv, summarize, write_csv, write_json
from .plant import simulate
from .synthesis import closed_loop_eigenvalues, synthesize_gains, verify_spectrum
from .trajectory import ConstantReference, spiral_reference

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3

_SUBSYSTEM_ROWS = (("z", "A0"), ("psi", "A1"), ("x", "A2x"), ("y", "A2y"))


def gains_document(cfg: ExperimentConfig) -> tuple[ControllerGains, dict]:
    """Synthesized (or explicit) gain rows plus where they came from."""
    doc: dict = {"source": cfg.source, "subsystems": {}}
    if cfg.explicit_gains is not None:
        gains = cfg.explicit_gains
        for sub, key in _SUBSYSTEM_ROWS:
            A = getattr(gains, key)
            eig = closed_loop_eigenvalues(A)
            doc["subsystems"][sub] = {
                "row": key,
                "A": A.tolist(),
                "provenance": "explicit",
                "closed_loop_eigenvalues": _complex_list(eig),
            }
        return gains, doc
    for sub, key in _SUBSYSTEM_ROWS:
        design = cfg.designs[sub]
        row = synthesize_gains(design)
        doc["subsystems"][sub] = {
            "row": key,
            "A": np.asarray(row.A, dtype=float).ravel().tolist(),
            "provenance": "synthesized",
            "Z": np.asarray(design.Z).tolist(),
            "F": np.asarray(design.F).tolist(),
            "closed_loop_eigenvalues": _complex_list(closed_loop_eigenvalues(row.A)),
            "spectrum_mismatch": verify_spectrum(row, design.F),
        }
    return cfg.gains(), doc


def _complex_list(vals) -> list:
    out = []
    for v in sorted(np.asarray(vals, dtype=complex), key=lambda c: (c.real, c.imag)):
        real = abs(v.imag) <= 1e-9 * max(1.0, abs(v))
        out.append(float(v.real) if real else [float(v.real), float(v.imag)])
    return out


def _closed_loop_run(cfg: ExperimentConfig, gains: ControllerGains, reference, out_dir: Path) -> int:
    sim = cfg.simulation
    ctl = TrackingController(reference, gains, cfg.quadrotor, cfg.constraints, on_singular=sim.on_singular)
    log = simulate(
        cfg.initial_state, ctl, cfg.actuator_limits, cfg.quadrotor, sim.horizon, sim.dt,
        hold=sim.hold, truncate_on_error=True,
    )
    csv_path = out_dir / cfg.output.csv
    write_csv(log, csv_path)
    summary = {
        "mode": cfg.mode,
        "config": cfg.source,
        "horizon": sim.horizon,
        "dt": sim.dt,
        "hold": sim.hold,
        "csv": cfg.output.csv,
        "aborted": None,
    }
    summary.update(summarize(read_csv(csv_path), sim.tail_window))
    if log.aborted is not None:
        summary["aborted"] = {"time": log.aborted.time, "reason": str(log.aborted)}
    write_json(summary, out_dir / cfg.output.summary)
    if cfg.output.plot_script:
        emit_plot_script(csv_path, out_dir / cfg.output.plot_script)
    if log.aborted is not None:
        print(f"run aborted at t={log.aborted.time}: {log.aborted}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def _roea_run(cfg: ExperimentConfig, gains: ControllerGains, out_dir: Path) -> int:
    r = cfg.roea
    if r.sampling == "grid":
        sampling = GridSampling(r.lower, r.upper, r.points)
    else:
        sampling = UniformSampling(r.lower, r.upper, r.n, r.seed)
    report = estimate_roea(
        r.subsystem, gains, cfg.constraints, sampling, r.horizon, r.dt,
        params=cfg.quadrotor, limits=cfg.actuator_limits, base_state=r.base_state.as_array(),
        axes=r.axes, workers=r.workers,
    )
    doc = report.summary()
    doc["config"] = cfg.source
    doc["samples_detail"] = [
        {
            "x0": res.x0.tolist(),
            "status": res.status,
            "worst_margin": res.worst_margin,
            "first_violation": None if res.first_violation is None else list(res.first_violation),
        }
        for res in report.results
    ]
    write_json(doc, out_dir / cfg.output.roea)
    return EXIT_OK


def run(mode: str, config: str, out: str | None = None) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        gains, gains_doc = gains_document(cfg)
    except ValueError as exc:
        # unrealizable design (singular V, spectrum not assigned)
        print(f"config error: {cfg.source}: design: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg.mode = mode
    out_dir = Path(out if out is not None else cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(gains_doc, out_dir / cfg.output.gains)

    if mode == "synthesize":
        return EXIT_OK
    if mode == "track":
        return _closed_loop_run(cfg, gains, lambda t: spiral_reference(t, cfg.trajectory), out_dir)
    if mode == "simulate":
        sp = cfg.setpoint
        return _closed_loop_run(cfg, gains, ConstantReference(sp["z"], sp["psi"], sp["X"]), out_dir)
    return _roea_run(cfg, gains, out_dir)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucfas", description="Quadrotor fully-actuated-model control experiments.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="YAML file or built-in name (e.g. paper_defaults)")
    p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.mode, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
