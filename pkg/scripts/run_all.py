#!/usr/bin/env python3
"""Run every registered experiment with default parameters into out/.

Each run is fully determined by its seed; rerunning reproduces the CSVs
byte for byte.
"""

import sys
from pathlib import Path

from wmstat.cli import main

SEED = 20240901
OUT = Path(__file__).resolve().parent.parent / "out"

RUNS = [
    ["ump", "--rho", "0.5,0.3,0.2", "--eps", "0.05"],
    ["rates", "--h", "0.1", "--alpha", "0.01", "--beta", "0.01", "--n_max", "1024"],
    ["agnostic", "--n", "8", "--alpha", "1/4", "--instances", "30"],
    ["robust", "--rho", "0.5,0.3,0.2", "--alpha", "0.2",
     "--graphs", "selfloops+chain+cycle+complete"],
    ["schemes", "--lm", "fair-coin", "--scheme", "srl+christ+ump",
     "--n", "100", "--alpha", "0.05", "--trials", "500"],
]


def run_all() -> int:
    OUT.mkdir(exist_ok=True)
    for args in RUNS:
        name = args[0]
        out_path = OUT / f"{name}.csv"
        full = args + ["--seed", str(SEED), "--out", str(out_path)]
        code = main(full)
        if code != 0:
            print(f"{name}: FAILED with exit {code}", file=sys.stderr)
            return code
        print(f"{name}: wrote {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(run_all())
