#!/usr/bin/env python3
"""Run every figure preset and drop the outputs under results/.

Usage: python scripts/run_figures.py [--out results] [--workers 4]
"""

import argparse
from pathlib import Path

from cborelax.cli import ExperimentSpec, run_experiment

PRESETS = ("fig1", "fig2a", "fig2b", "fig2c", "fig3-sweep", "fig4", "decompose")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    for preset in PRESETS:
        out = Path(args.out) / preset
        manifest = run_experiment(ExperimentSpec(
            preset=preset, output_dir=out, seed=args.seed, workers=args.workers,
        ))
        print(f"{preset}: {len(manifest['files'])} files -> {out}")


if __name__ == "__main__":
    main()
