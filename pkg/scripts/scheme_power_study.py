#!/usr/bin/env python3
"""Power curves: miss rate vs length for each scheme and the optimal coupling.

Writes out/scheme_power.csv and a companion SVG.  The optimal coupling's
curve lower-bounds every scheme at each length, illustrating the dominance
that the acceptance suite asserts statistically.
"""

from pathlib import Path

from wmstat.cli import CsvTable, fmt
from wmstat.lm import fair_coin_lm
from wmstat.plots import svg_line_plot
from wmstat.schemes import (
    ChristBinary,
    ChristBinaryConfig,
    SoftRedList,
    SoftRedListConfig,
    UmpSequence,
    UmpSequenceConfig,
    estimate_type2,
)

SEED = 714
ALPHA = 0.05
TRIALS = 400
LENGTHS = (20, 40, 60, 100, 150, 200)
OUT = Path(__file__).resolve().parent.parent / "out"


def schemes_at(n: int):
    return {
        "srl": SoftRedList(
            SoftRedListConfig(n=n, target_alpha=ALPHA, gamma=0.5, delta=2.0, vocab_size=2)
        ),
        "christ": ChristBinary(
            ChristBinaryConfig(n=n, target_alpha=ALPHA, entropy_threshold=3.0)
        ),
        "ump": UmpSequence(UmpSequenceConfig(n=n, target_alpha=ALPHA)),
    }


def run() -> None:
    lm = fair_coin_lm()
    names = list(schemes_at(LENGTHS[0]))
    rows = []
    for n in LENGTHS:
        cells = [fmt(n)]
        for name, scheme in schemes_at(n).items():
            miss, _ = estimate_type2(scheme, lm, trials=TRIALS, seed=SEED)
            cells.append(fmt(miss))
        rows.append(tuple(cells))
        print(f"n={n}: " + " ".join(f"{name}={cell}" for name, cell in zip(names, cells[1:])))
    table = CsvTable(header=("n", *(f"type2_{name}" for name in names)), rows=tuple(rows))
    OUT.mkdir(exist_ok=True)
    (OUT / "scheme_power.csv").write_bytes(table.to_text().encode())
    svg_line_plot(
        table.header,
        table.rows,
        "n",
        tuple(f"type2_{name}" for name in names),
        OUT / "scheme_power.svg",
        title="miss rate vs length",
    )
    print(f"wrote {OUT/'scheme_power.csv'} and {OUT/'scheme_power.svg'}")


if __name__ == "__main__":
    run()
