#!/usr/bin/env python3
"""Yaw-loop region of attraction under |u1| <= 0.5 on a 21x21 grid, with a map."""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ucfas import ControllerGains, GridSampling, InputConstraintSet, estimate_roea  # noqa: E402
from ucfas.fas_model import Box  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--u1", type=float, default=0.5, help="symmetric |u1| bound")
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--out", default="out/roea")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    box = InputConstraintSet(u1=Box(-args.u1, args.u1))
    sampling = GridSampling([-0.03, -0.1], [0.03, 0.1], args.points)
    rep = estimate_roea("psi", ControllerGains.default(), box, sampling)
    print(rep.summary())

    pts = rep.samples
    colors = {"member": "tab:green", "non-member": "tab:red", "marginal": "tab:orange"}
    fig, ax = plt.subplots(figsize=(6, 5))
    for status, c in colors.items():
        m = np.array([s == status for s in rep.status])
        if m.any():
            ax.scatter(pts[m, 0], pts[m, 1], s=14, c=c, label=status)
    e = np.linspace(-0.03, 0.03, 2)
    # t = 0 boundary |20 e + 9 e'| = u1_max
    for sign in (1, -1):
        ax.plot(e, (sign * args.u1 - 20 * e) / 9, "k--", lw=0.8)
    ax.set_xlim(-0.032, 0.032)
    ax.set_ylim(-0.105, 0.105)
    ax.set_xlabel("yaw error [rad]")
    ax.set_ylabel("yaw error rate [rad/s]")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out / "roea_psi.png", dpi=120)
    print(f"wrote {out / 'roea_psi.png'}")


if __name__ == "__main__":
    main()
