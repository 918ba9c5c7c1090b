#!/usr/bin/env python3
"""Run all four parameter-scaling sweeps and print the fitted slopes.

Usage: python scripts/run_scaling.py [--out results/scaling] [--seeds 20]
"""

import argparse
from pathlib import Path

from cborelax.analysis import SWEEP_AXES
from cborelax.cli import run_scaling

THEORY = {"n_particles": -0.5, "lambda_gap": 1.0, "sigma_sqrt_dt": None, "tau": 1.0}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results/scaling")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    for axis in SWEEP_AXES:
        report = run_scaling(axis, Path(args.out), args.seed, {"seeds": args.seeds})
        theory = THEORY[axis]
        note = f" (theory {theory:+.1f})" if theory is not None else ""
        print(f"{axis:>14}: slope {report['fitted_slope']:+.3f} "
              f"CI [{report['slope_ci'][0]:+.3f}, {report['slope_ci'][1]:+.3f}]{note}")


if __name__ == "__main__":
    main()
