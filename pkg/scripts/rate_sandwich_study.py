#!/usr/bin/env python3
"""Empirical first-crossing token counts against the closed-form bounds.

Sweeps the per-token entropy of the two-point hard instance and prints a
table of the lower bound, observed crossing, and upper bound, confirming the
sandwich at each grid point.
"""

from wmstat.rates import (
    hard_instance,
    min_tokens_lower_bound,
    min_tokens_upper_bound,
    n_required_empirical,
)

ALPHA = BETA = 0.01
GRID = (0.03, 0.05, 0.08, 0.1, 0.15, 0.2, 0.24)


def run() -> None:
    print(f"{'h':>6} {'lower':>10} {'n*':>8} {'upper':>12} {'beta(n*-1)':>12}")
    for h in GRID:
        rho0 = hard_instance(h)
        lower = min_tokens_lower_bound(h, ALPHA, BETA)
        upper = min_tokens_upper_bound(h, ALPHA, BETA, 2)
        n_star, curve = n_required_empirical(rho0, ALPHA, BETA, 16384)
        assert n_star is not None and lower <= n_star <= upper
        before = curve.beta_at(n_star - 1) if n_star > 1 else float("nan")
        print(f"{h:6.3f} {lower:10.1f} {n_star:8d} {upper:12.1f} {before:12.5f}")
    print("sandwich holds at every grid point")


if __name__ == "__main__":
    run()
