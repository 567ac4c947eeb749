#!/usr/bin/env python3
"""How far the sampled loop drifts from the ideal two-pole altitude/yaw response.

Compares zero-order hold (one controller call per step) with per-stage
evaluation for a few dt values.
"""
import numpy as np

from ucfas.config import load_config
from ucfas.control import TrackingController
from ucfas.plant import PlantState, simulate
from ucfas.trajectory import spiral_reference


def deviation(hold, dt, cfg, s0):
    ctl = TrackingController(lambda t: spiral_reference(t, cfg.trajectory), cfg.gains(), cfg.quadrotor)
    log = simulate(s0, ctl, cfg.actuator_limits, cfg.quadrotor, 10.0, dt, hold=hold)
    t = log.t
    worst = 0.0
    pairs = ((log.states[:, 2] - log.reference[:, 2], s0.vz - log.reference[0, 4]),
             (log.states[:, 8] - log.reference[:, 3], s0.r - log.reference[0, 5]))
    for e, d0 in pairs:
        e0 = e[0]
        c1, c2 = 5 * e0 + d0, -4 * e0 - d0
        worst = max(worst, float(np.abs(e - c1 * np.exp(-4 * t) - c2 * np.exp(-5 * t)).max()))
    return worst


def main():
    cfg = load_config("paper_defaults")
    s0 = PlantState(x=0.5, z=0.05, vz=cfg.trajectory.climb_rate, psi=0.03)
    print(f"{'dt':>8} {'zoh':>10} {'stage':>10} {'zoh ratio':>10} {'stage ratio':>12}")
    prev = None
    for dt in (4e-3, 2e-3, 1e-3):
        z = deviation("zoh", dt, cfg, s0)
        s = deviation("stage", dt, cfg, s0)
        ratios = f"{prev[0] / z:10.1f} {prev[1] / s:12.1f}" if prev else ""
        print(f"{dt:8.0e} {z:10.2e} {s:10.2e} {ratios}")
        prev = (z, s)

if __name__ == "__main__":
    main()
