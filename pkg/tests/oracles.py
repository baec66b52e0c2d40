"""Independent oracles the tests check library results against.

Everything here is deliberately brute force: Pascal's recurrence, exhaustive
vertex enumeration, grid search over perturbation balls, exact-rational
re-summation.  None of it shares code paths with the library.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from wmstat.simplex import LpProblem


def pascal_binom(n: int, k: int) -> int:
    """C(n, k) by Pascal's recurrence."""
    if k < 0 or k > n:
        return 0
    row = [1]
    for _ in range(n):
        row = [1] + [row[i] + row[i + 1] for i in range(len(row) - 1)] + [1]
    return row[k]


def vertex_enumeration_optimum(problem: LpProblem) -> float | None:
    """Optimal value over all basic feasible points, or None if infeasible.

    Every vertex of {Ax <= b, lo <= x <= hi} makes some n constraints tight;
    enumerate all n-subsets of rows (including bound rows), solve, and keep
    feasible solutions.  Only valid for bounded feasible regions.
    """
    n = problem.n_vars
    rows = [(list(coeffs), float(rhs)) for coeffs, rhs in problem.constraints]
    for j, (lo, hi) in enumerate(problem.bounds):
        unit = [0.0] * n
        unit[j] = 1.0
        rows.append((list(unit), float(hi)))
        rows.append(([-v for v in unit], -float(lo)))
    a_full = np.array([r for r, _ in rows])
    b_full = np.array([b for _, b in rows])
    best = None
    c = np.array(problem.objective, dtype=float)
    for subset in itertools.combinations(range(len(rows)), n):
        a = a_full[list(subset)]
        b = b_full[list(subset)]
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)):
            continue
        if np.all(a_full @ x <= b_full + 1e-9):
            value = float(c @ x)
            if best is None or value > best:
                best = value
    return best


def grid_search_distortion(probs, alpha: float, eps: float, step: float = 0.005) -> float:
    """Min clipped surplus over a gridded TV ball around ``probs``.

    Enumerates simplex grid points within TV eps (plus half a step of slack
    for the discretization) and minimizes sum((p - alpha)+) directly.
    """
    k = len(probs)
    if k > 3:
        raise ValueError("grid oracle limited to k <= 3")
    base = np.asarray(probs, dtype=float)
    ticks = int(round(1.0 / step))
    best = math.inf
    if k == 2:
        first = np.arange(ticks + 1) / ticks
        grid = np.stack([first, 1.0 - first], axis=1)
    else:
        pts = []
        for i in range(ticks + 1):
            for j in range(ticks + 1 - i):
                pts.append((i / ticks, j / ticks, (ticks - i - j) / ticks))
        grid = np.array(pts)
    tv = 0.5 * np.abs(grid - base).sum(axis=1)
    ok = grid[tv <= eps + 1e-12]
    surplus = np.clip(ok - alpha, 0.0, None).sum(axis=1)
    best = float(surplus.min())
    return best


def type2_product_rational(probs, n: int, alpha: Fraction) -> Fraction:
    """Exact rational miss probability over all count-vector classes."""
    probs = [Fraction(p) for p in probs]
    alpha = Fraction(alpha)
    k = len(probs)
    total = Fraction(0)

    def visit(idx: int, remaining: int, class_prob: Fraction, mult: int) -> None:
        nonlocal total
        if idx == k - 1:
            class_prob *= probs[idx] ** remaining
            if class_prob > alpha:
                total += mult * (class_prob - alpha)
            return
        for c in range(remaining + 1):
            visit(
                idx + 1,
                remaining - c,
                class_prob * probs[idx] ** c,
                mult * math.comb(remaining, c),
            )

    visit(0, n, Fraction(1), 1)
    return total


def worst_set_gap_brute(probs, law) -> float:
    """max over all U of rho(U) - P(region hits U), by full enumeration."""
    n = len(probs)
    best = 0.0
    for bits in range(1 << n):
        total = 0.0
        size = 0
        for x in range(n):
            if bits >> x & 1:
                total += float(probs[x])
                size += 1
        best = max(best, total - float(law.hit_probability(size)))
    return best


def random_dist(rng: np.random.Generator, k: int, spread: float = 1.0):
    """Dirichlet-style random probability vector as a plain tuple."""
    w = rng.dirichlet(np.full(k, spread))
    w = w / w.sum()
    return tuple(float(v) for v in w)
