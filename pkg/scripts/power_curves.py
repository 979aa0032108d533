#!/usr/bin/env python3
"""Tabulate simulated power over replicate counts and effect sizes.

The classic way to pick a replicate count is reading an operating
characteristic curve; this prints the equivalent table from Monte-Carlo
simulation of the one-way F test, one row per replicate count, one column
per standardized effect size (mean gap in sigma units between two groups).

Usage:
    python scripts/power_curves.py [--alpha 0.05] [--trials 20000] \
        [--n-values 2,4,8,16,32] [--deltas 0.5,1.0,1.5,2.0] [--seed 0]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from evalbench.doe import simulate_power


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--trials", type=int, default=20000)
    parser.add_argument("--n-values", default="2,4,8,16,32")
    parser.add_argument("--deltas", default="0.5,1.0,1.5,2.0")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    n_values = [int(x) for x in args.n_values.split(",")]
    deltas = [float(x) for x in args.deltas.split(",")]

    header = "n".rjust(6) + "".join(f"d={d:g}".rjust(10) for d in deltas)
    print(header)
    print("-" * len(header))
    for n in n_values:
        row = [f"{n}".rjust(6)]
        for delta in deltas:
            power = simulate_power(
                k=2, n=n, means=[0.0, delta], sigma=1.0,
                alpha=args.alpha, trials=args.trials, seed=args.seed,
            )
            row.append(f"{power:.3f}".rjust(10))
        print("".join(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
