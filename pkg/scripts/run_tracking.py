#!/usr/bin/env python3
"""Spiral tracking run with the shipped defaults, then render the figures.

    python3 scripts/run_tracking.py [--out out/tracking] [--config paper_defaults]
"""
import argparse
import subprocess
import sys
from pathlib import Path

from ucfas.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="paper_defaults")
    ap.add_argument("--out", default="out/tracking")
    args = ap.parse_args()
    status = cli_main(["track", "--config", args.config, "--out", args.out])
    script = Path(args.out) / "plot_tracking.py"
    if script.exists():
        subprocess.run([sys.executable, str(script)], check=True)
        print(f"figures written next to {script}")
    print((Path(args.out) / "summary.json").read_text())
    return status


if __name__ == "__main__":
    sys.exit(main())
